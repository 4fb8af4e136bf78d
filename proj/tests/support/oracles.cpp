#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>

namespace logeval::oracle {
namespace {

Tokens slice(const Tokens& t, std::size_t i, std::size_t n) {
  return Tokens(t.begin() + static_cast<std::ptrdiff_t>(i),
                t.begin() + static_cast<std::ptrdiff_t>(i + n));
}

std::size_t occurrences(const Tokens& t, const Tokens& gram) {
  std::size_t c = 0;
  for (std::size_t i = 0; i + gram.size() <= t.size(); ++i) {
    if (slice(t, i, gram.size()) == gram) ++c;
  }
  return c;
}

// Sum over distinct candidate n-grams of min(count in cand, count in ref).
std::size_t clipped(const Tokens& cand, const Tokens& ref, std::size_t n) {
  std::vector<Tokens> seen;
  std::size_t total = 0;
  for (std::size_t i = 0; i + n <= cand.size(); ++i) {
    Tokens g = slice(cand, i, n);
    if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
    seen.push_back(g);
    total += std::min(occurrences(cand, g), occurrences(ref, g));
  }
  return total;
}

bool is_subsequence(const Tokens& sub, const Tokens& of) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < of.size() && j < sub.size(); ++i) {
    if (of[i] == sub[j]) ++j;
  }
  return j == sub.size();
}

double harmonic(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

}  // namespace

double bleu(const Tokens& cand, const Tokens& ref, int max_order) {
  if (cand.empty() || ref.empty()) return 0.0;
  const int order = std::min<int>(max_order, static_cast<int>(cand.size()));
  double product = 1.0;
  for (int n = 1; n <= order; ++n) {
    const double total = static_cast<double>(cand.size()) - n + 1;
    const double hit = static_cast<double>(clipped(cand, ref, static_cast<std::size_t>(n)));
    product *= (hit > 0 ? hit : 1e-9) / total;
  }
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double bp = c >= r ? 1.0 : std::exp(1 - r / c);
  return bp * std::pow(product, 1.0 / order);
}

double rouge_n(const Tokens& cand, const Tokens& ref, int n) {
  const auto un = static_cast<std::size_t>(n);
  if (cand.size() < un || ref.size() < un) return 0.0;
  const double hit = static_cast<double>(clipped(cand, ref, un));
  return harmonic(hit / static_cast<double>(cand.size() - un + 1),
                  hit / static_cast<double>(ref.size() - un + 1));
}

std::size_t lcs_bruteforce(const Tokens& a, const Tokens& b) {
  std::size_t best = 0;
  const std::uint32_t limit = 1u << a.size();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    Tokens sub;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(a[i]);
    }
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

double rouge_l(const Tokens& cand, const Tokens& ref) {
  if (cand.empty() || ref.empty()) return 0.0;
  const double l = static_cast<double>(lcs_bruteforce(cand, ref));
  return harmonic(l / static_cast<double>(cand.size()), l / static_cast<double>(ref.size()));
}

std::size_t levenshtein(const Tokens& a, const Tokens& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::size_t best = go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    best = std::min(best, go(i + 1, j) + 1);
    best = std::min(best, go(i, j + 1) + 1);
    memo[key] = best;
    return best;
  };
  return go(0, 0);
}

double ntlev(const Tokens& cand, const Tokens& ref) {
  const std::size_t m = std::max(cand.size(), ref.size());
  return m == 0 ? 0.0 : static_cast<double>(levenshtein(cand, ref)) / static_cast<double>(m);
}

double aod_pair(int a, int s) {
  int max_dis = 0;
  for (int x = 0; x <= 4; ++x) max_dis = std::max(max_dis, std::abs(a - x));
  return 1.0 - static_cast<double>(std::abs(a - s)) / max_dis;
}

double cosine(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::map<std::string, double> fa, fb;
  for (const auto& t : a) fa[t] += 1;
  for (const auto& t : b) fb[t] += 1;
  double dot = 0, na = 0, nb = 0;
  for (const auto& [k, v] : fa) {
    na += v * v;
    if (fb.count(k)) dot += v * fb[k];
  }
  for (const auto& [k, v] : fb) nb += v * v;
  return dot / std::sqrt(na * nb);
}

Tokens random_tokens(std::mt19937_64& rng, int max_len) {
  static const std::vector<std::string> vocab = {"load", "model", "data", "epoch", "the",
                                                 "train", "loss", "step"};
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1);
  Tokens t(static_cast<std::size_t>(len(rng)));
  for (auto& w : t) w = vocab[word(rng)];
  return t;
}

LogStatement make_log(Origin origin, const std::string& file, const std::string& path, int line,
                      const std::string& message, LogLevel level, std::vector<std::string> vars) {
  LogStatement s;
  s.origin = origin;
  s.repo_id = "r";
  s.file_id = file;
  s.path = CodePath::parse(path);
  s.line = line;
  s.level = level;
  s.raw_statement = "logger." + std::string(to_string(level)) + "(\"" + message + "\")";
  s.template_text = message;
  s.variables = std::move(vars);
  return s;
}

}  // namespace logeval::oracle
