#pragma once

#include <string>
#include <string_view>

namespace tsc {

/// Lower-case hex SHA-256 of `bytes`.
[[nodiscard]] std::string sha256_hex(std::string_view bytes);

}  // namespace tsc
