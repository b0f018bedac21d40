#pragma once

namespace modeplan {

/// Sets the diagnostic level from MODEPLAN_LOG (error|warn|info|debug); default warn. Logs go to stderr.
void init_logging();

}  // namespace modeplan
