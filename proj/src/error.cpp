#include "opramsey/error.hpp"

namespace opramsey {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::symmetry: return "symmetry";
    case ErrorKind::arity: return "arity";
    case ErrorKind::shape: return "shape";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::category: return "category";
    case ErrorKind::budget: return "budget";
    case ErrorKind::internal: return "internal";
    case ErrorKind::net_construction: return "net-construction";
    case ErrorKind::net_resolution: return "net-resolution";
    case ErrorKind::rigidity: return "rigidity";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::domain: return "domain";
    case ErrorKind::encoding: return "encoding";
    case ErrorKind::sdp_failure: return "sdp";
  }
  return "unknown";
}

}  // namespace opramsey
