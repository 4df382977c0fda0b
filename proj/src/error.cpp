#include "spine/error.hpp"

namespace spine {

std::string_view to_string(Errc code) {
    switch (code) {
    case Errc::InvalidGeometry: return "invalid geometry";
    case Errc::DomainError: return "domain error";
    case Errc::SingularPoint: return "singular point";
    case Errc::MeshTooCoarse: return "mesh too coarse";
    case Errc::MeshFailure: return "mesh failure";
    case Errc::WindowUnresolved: return "window unresolved";
    case Errc::NoConvergence: return "no convergence";
    case Errc::SingularSystem: return "singular system";
    case Errc::OutsideDomain: return "outside domain";
    case Errc::StepTooLarge: return "step too large";
    case Errc::ConfigError: return "config error";
    case Errc::EmptyGrid: return "empty grid";
    }
    return "unknown error";
}

} // namespace spine
