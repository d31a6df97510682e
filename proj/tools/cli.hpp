#pragma once

#include <string>
#include <vector>

namespace bicex {

/// Entry point of the bicex command line tool; args excludes the program
/// name. Returns 0 on success, 1 on an audit failure verdict, 2 on usage or
/// configuration errors.
int cli_main(std::vector<std::string> args);

}  // namespace bicex
