#pragma once

#include <ostream>

namespace hql::cli {

/// Exit codes: 0 success, 1 unexpected failure, 2 configuration error,
/// 3 data error, 4 numeric failure.
enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kNumeric = 4 };

/// Full command-line front end; argv[0] is the program name. Diagnostics go
/// to `err`, summaries to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hql::cli
