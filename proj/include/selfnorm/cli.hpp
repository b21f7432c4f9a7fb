#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace selfnorm {

/// Exit codes: 0 success, 1 bound violation, 2 invalid configuration or
/// arguments, 3 runtime failure.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace selfnorm
