#include "levylab/error.hpp"

namespace levylab {

const char* errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::parameter_domain: return "parameter_domain";
        case Errc::unsupported_parametrization: return "unsupported_parametrization";
        case Errc::numerical: return "numerical";
        case Errc::fit: return "fit";
        case Errc::shape: return "shape";
        case Errc::argument: return "argument";
        case Errc::insufficient_data: return "insufficient_data";
        case Errc::degenerate_data: return "degenerate_data";
        case Errc::grid_too_small: return "grid_too_small";
        case Errc::drift_overflow: return "drift_overflow";
        case Errc::config: return "config";
        case Errc::io: return "io";
    }
    return "unknown";
}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace levylab
