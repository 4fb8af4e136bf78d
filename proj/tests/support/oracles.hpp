#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "logeval/pairing.hpp"

// Reference implementations written independently of the library code. They
// favour obviousness over speed: brute-force n-gram counting, LCS by subset
// enumeration, memoised recursive edit distance.
namespace logeval::oracle {

using Tokens = std::vector<std::string>;

double bleu(const Tokens& cand, const Tokens& ref, int max_order);
double rouge_n(const Tokens& cand, const Tokens& ref, int n);
double rouge_l(const Tokens& cand, const Tokens& ref);
std::size_t lcs_bruteforce(const Tokens& a, const Tokens& b);
std::size_t levenshtein(const Tokens& a, const Tokens& b);
double ntlev(const Tokens& cand, const Tokens& ref);

// 1 - |a-s| / (largest |a-x| over the five levels x).
double aod_pair(int a, int s);

double cosine(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Random tokens drawn from a small vocabulary so overlaps are common.
Tokens random_tokens(std::mt19937_64& rng, int max_len);

// A LogStatement at `file`/`path` with the given line and message.
LogStatement make_log(Origin origin, const std::string& file, const std::string& path, int line,
                      const std::string& message, LogLevel level = LogLevel::kInfo,
                      std::vector<std::string> vars = {});

}  // namespace logeval::oracle
