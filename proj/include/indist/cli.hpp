#pragma once

namespace indist {

// Exit codes: 0 success, 1 runtime failure, 2 usage / unknown subcommand,
// 3 malformed config, 4 missing input file.
int cli_dispatch(int argc, char** argv);

}  // namespace indist
