#pragma once

#include <stdexcept>
#include <string>

namespace plantcap {

/// Machine-greppable error codes. The CLI prints these as `error[<name>]: ...`
/// and exits nonzero, so scripts can dispatch on the bracketed token.
enum class Errc {
    negative_count,
    census_below_certain_captures,
    empty_class_list,
    parse_error,
    infeasible_data,
    non_finite_start,
    non_finite_evaluation,
    negative_variance,
    no_certain_captures,
    no_certain_plants,
    optimizer_failure,
    no_feasible_init,
    insufficient_draws,
    unknown_preset,
    all_replicates_failed,
    bad_config,
    io_error,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

} // namespace plantcap
