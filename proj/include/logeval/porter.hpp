#pragma once

#include <string>
#include <string_view>

namespace logeval {

// Porter (1980) suffix-stripping stemmer. Input is expected lowercase.
std::string porter_stem(std::string_view word);

}  // namespace logeval
