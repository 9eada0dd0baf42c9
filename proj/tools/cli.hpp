#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ltsg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// args excludes the program name. Normal output goes to `out`; logs,
// warnings and errors go to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ltsg::cli
