// Two-photon beam-splitter simulation in an explicit bosonic Fock basis. It
// shares only envelope_overlap with the projection formula in hom.cpp.

#include <cmath>
#include <map>
#include <utility>

#include "tbq/errors.hpp"
#include "tbq/hom.hpp"

namespace tbq {

namespace {

// Output mode index: ((arm * labels + label) * 2 + pol) * rank + temporal.
struct ModeSpace {
  int labels;
  int rank;
  int per_arm() const { return labels * 2 * rank; }
  int index(int arm, int label, int pol, int m) const {
    return ((arm * labels + label) * 2 + pol) * rank + m;
  }
};

// Coordinates of each shifted mode function f(t - s_a) in an orthonormal
// basis of their span: C(a, m) with C C^T = Gram.
Eigen::MatrixXd temporal_coordinates(const std::vector<double>& shifts, const Wavepacket& packet) {
  const int n = static_cast<int>(shifts.size());
  Eigen::MatrixXd gram(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) gram(a, b) = envelope_overlap(packet, shifts[b] - shifts[a]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double top = eig.eigenvalues().maxCoeff();
  std::vector<int> kept;
  for (int m = 0; m < n; ++m)
    if (eig.eigenvalues()(m) > 1e-13 * top) kept.push_back(m);
  Eigen::MatrixXd coords(n, static_cast<int>(kept.size()));
  for (int c = 0; c < static_cast<int>(kept.size()); ++c)
    coords.col(c) = eig.eigenvectors().col(kept[c]) * std::sqrt(eig.eigenvalues()(kept[c]));
  return coords;
}

// Probability that the two photons leave through different output arms.
double coincidence_probability(const ComplexVector& encoded_in, const ComplexVector& ancilla_in,
                               const ModeSpace& modes) {
  // Input arm A carries the encoded photon, arm B the ancilla. The balanced
  // splitter maps a_A -> (b_C + b_D)/sqrt2 and a_B -> (b_C - b_D)/sqrt2.
  const int total = 2 * modes.per_arm();
  const double s = 1.0 / std::sqrt(2.0);
  ComplexVector u = ComplexVector::Zero(total);
  ComplexVector v = ComplexVector::Zero(total);
  for (int i = 0; i < modes.per_arm(); ++i) {
    u(i) = s * encoded_in(i);
    u(modes.per_arm() + i) = s * encoded_in(i);
    v(i) = s * ancilla_in(i);
    v(modes.per_arm() + i) = -s * ancilla_in(i);
  }
  // b+_x b+_y |0> = |1_x 1_y> for x != y and sqrt2 |2_x> for x == y.
  std::map<std::pair<int, int>, Complex> fock;
  for (int x = 0; x < total; ++x) {
    if (u(x) == 0.0) continue;
    for (int y = 0; y < total; ++y) {
      if (v(y) == 0.0) continue;
      const auto key = std::minmax(x, y);
      fock[{key.first, key.second}] += (x == y ? std::sqrt(2.0) : 1.0) * u(x) * v(y);
    }
  }
  double norm = 0.0;
  double coincident = 0.0;
  for (const auto& [key, amp] : fock) {
    const double p = std::norm(amp);
    norm += p;
    const bool first_c = key.first < modes.per_arm();
    const bool second_c = key.second < modes.per_arm();
    if (first_c != second_c) coincident += p;
  }
  if (norm <= 0.0) throw AnnihilatedStateError();
  return coincident / norm;
}

}  // namespace

double fock_oracle_ratio(const PhotonState& encoded, const PhotonState& ancilla, double delay,
                         const VisibilityModel& vis, int mode_cap) {
  if (!encoded.lattice().same_spacing(ancilla.lattice())) throw DimensionError("bin spacing mismatch");
  if (!(encoded.packet() == ancilla.packet())) throw DimensionError("wavepacket mismatch");
  const int ne = encoded.bins();
  const int na = ancilla.bins();
  if (2 * 2 * (ne + na) > mode_cap) throw DimensionError("Fock oracle mode count exceeds cap");

  const double tau = encoded.lattice().spacing();
  std::vector<double> shifts;
  for (int j = 0; j < ne; ++j) shifts.push_back(j * tau);
  for (int k = 0; k < na; ++k) shifts.push_back(k * tau + delay);
  const Eigen::MatrixXd coords = temporal_coordinates(shifts, encoded.packet());

  const ModeSpace modes{2, static_cast<int>(coords.cols())};
  auto embed = [&](const PhotonState& s, int first_shift, int label) {
    ComplexVector in = ComplexVector::Zero(modes.per_arm());
    for (int pol = 0; pol < 2; ++pol)
      for (int b = 0; b < s.bins(); ++b)
        for (int m = 0; m < modes.rank; ++m)
          in(modes.index(0, label, pol, m)) +=
              s.amplitude(static_cast<Pol>(pol), b) * coords(first_shift + b, m);
    return in;
  };
  const ComplexVector e = embed(encoded, 0, 0);
  const double indistinguishable = coincidence_probability(e, embed(ancilla, ne, 0), modes);
  const double distinguishable = coincidence_probability(e, embed(ancilla, ne, 1), modes);
  const double v = vis.value();
  return (v * indistinguishable + (1.0 - v) * distinguishable) / distinguishable;
}

}  // namespace tbq
