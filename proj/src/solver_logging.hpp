#pragma once

#include <mutex>

#include <glog/logging.h>

namespace tbq::detail {

// Ceres reports line-search trouble through glog at WARNING level; those
// messages are expected near degenerate optima and are not useful here.
inline void quiet_solver_logging() {
  static std::once_flag once;
  std::call_once(once, [] { FLAGS_minloglevel = google::GLOG_ERROR; });
}

}  // namespace tbq::detail
