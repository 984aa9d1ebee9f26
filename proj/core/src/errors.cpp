#include "qcap/errors.hpp"

#include <string>

#include "qcap/version.hpp"

namespace qcap {

FeasibilityError::FeasibilityError(std::size_t band, double floor, double value)
    : std::domain_error("power fraction " + std::to_string(value) + " in band " +
                        std::to_string(band) + " is below the feasibility floor " +
                        std::to_string(floor)),
      band_(band),
      floor_(floor),
      value_(value) {}

std::string_view version() noexcept { return QCAP_VERSION_STRING; }

}  // namespace qcap
