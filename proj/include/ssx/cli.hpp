#ifndef SSX_CLI_HPP
#define SSX_CLI_HPP

namespace ssx {

// Subcommand dispatcher: analyze, screen, bench, train-iter, train-ppo, plot.
// Returns 0 on success, 1 on data errors, 2 on usage errors.
int cli_dispatch(int argc, const char* const* argv);

} // namespace ssx

#endif
