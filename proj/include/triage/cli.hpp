#pragma once

#include <string>
#include <vector>

namespace triage::cli {

// Exit codes: 0 success / GO, 1 NO-GO, 2 usage or config error, 3 data error.
int run(const std::vector<std::string>& args);

} // namespace triage::cli
