#pragma once

namespace effscreen {

// Entry point for the `effscreen` command line tool (analyze / calibrate /
// simulate / report). Returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace effscreen
