#pragma once

#include <functional>
#include <string_view>

namespace hiermetric {

using WarningSink = std::function<void(std::string_view)>;

/// Replaces the warning sink (default: "warning: ..." lines on stderr).
/// Passing an empty function restores the default.
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace hiermetric
