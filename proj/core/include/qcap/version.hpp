#pragma once

#include <string_view>

namespace qcap {

/// Library version, stamped into every emitted result row.
std::string_view version() noexcept;

}  // namespace qcap
