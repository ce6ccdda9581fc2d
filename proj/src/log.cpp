#include "hiermetric/log.hpp"

#include <iostream>
#include <mutex>

namespace hiermetric {

namespace {
std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}
WarningSink& sink_slot() {
  static WarningSink sink;
  return sink;
}
}  // namespace

void set_warning_sink(WarningSink sink) {
  std::lock_guard lock(sink_mutex());
  sink_slot() = std::move(sink);
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (sink_slot()) {
    sink_slot()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

}  // namespace hiermetric
