#include "eqlab/error.hpp"

namespace eqlab {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SingularPoint: return "SingularPoint";
    case ErrorKind::NotImplemented: return "NotImplemented";
    case ErrorKind::Geometry: return "GeometryError";
    case ErrorKind::CriticalPoint: return "CriticalPoint";
    case ErrorKind::Bracket: return "BracketError";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::StencilOutOfDomain: return "StencilOutOfDomain";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorKind::OriginOutside: return "OriginOutside";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace eqlab
