#pragma once

namespace svt {

// Entry point behind the `svt` binary, callable in-process from tests.
// Exit codes: 0 ok, 1 runtime error, 2 usage error, 3 integrity warning.
int cli_main(int argc, const char* const* argv);

}  // namespace svt
