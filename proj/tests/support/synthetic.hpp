#pragma once

#include <cstdint>
#include <string>

namespace logeval::testkit {

// Random but valid Python 3.10 module of roughly `target_lines` lines. Covers
// nested classes and functions, every tracked control block, elif chains,
// match statements, inline suites, `;`-joined statements, multi-line calls,
// comments, docstrings and the usual log call spellings.
std::string synthetic_python(std::uint64_t seed, int target_lines = 200);

}  // namespace logeval::testkit
