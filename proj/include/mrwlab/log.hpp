#pragma once

#include <functional>
#include <string>

namespace mrw {

using LogSink = std::function<void(const std::string&)>;

/// Replace the warning sink (default: stderr).  Returns the previous sink.
LogSink set_warning_sink(LogSink sink);
void warn(const std::string& message);

}  // namespace mrw
