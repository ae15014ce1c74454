#ifndef LEVYLAB_ERROR_HPP
#define LEVYLAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace levylab {

enum class Errc {
    parameter_domain = 1,
    unsupported_parametrization,
    numerical,
    fit,
    shape,
    argument,
    insufficient_data,
    degenerate_data,
    grid_too_small,
    drift_overflow,
    config,
    io,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

inline void require(bool ok, Errc code, const std::string& message) {
    if (!ok) fail(code, message);
}

}  // namespace levylab

#endif
