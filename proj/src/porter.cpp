#include "logeval/porter.hpp"

#include <cctype>

namespace logeval {
namespace {

class Stemmer {
 public:
  explicit Stemmer(std::string_view w) : b_(w) {}

  std::string run() {
    if (b_.size() <= 2) return b_;
    for (char c : b_) {
      if (!std::islower(static_cast<unsigned char>(c))) return b_;
    }
    step1ab();
    if (b_.size() > 1) {
      step1c();
      step2();
      step3();
      step4();
      step5();
    }
    return b_;
  }

 private:
  std::string b_;
  int j_ = 0;  // end of the stem under consideration (inclusive index)

  int k() const { return static_cast<int>(b_.size()) - 1; }

  bool cons(int i) const {
    switch (b_[i]) {
      case 'a':
      case 'e':
      case 'i':
      case 'o':
      case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in b_[0..j_].
  int m() const {
    int n = 0;
    int i = 0;
    while (true) {
      if (i > j_) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    while (true) {
      while (true) {
        if (i > j_) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      while (true) {
        if (i > j_) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (int i = 0; i <= j_; ++i) {
      if (!cons(i)) return true;
    }
    return false;
  }

  bool doublec(int i) const {
    if (i < 1) return false;
    if (b_[i] != b_[i - 1]) return false;
    return cons(i);
  }

  // consonant-vowel-consonant ending at i, last not w/x/y
  bool cvc(int i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    char ch = b_[i];
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  bool ends(std::string_view s) {
    int len = static_cast<int>(s.size());
    if (len > k() + 1) return false;
    if (b_.compare(b_.size() - s.size(), s.size(), s) != 0) return false;
    j_ = k() - len;
    return true;
  }

  void setto(std::string_view s) {
    b_.resize(static_cast<std::size_t>(j_ + 1));
    b_.append(s);
  }

  void r(std::string_view s) {
    if (m() > 0) setto(s);
  }

  void step1ab() {
    if (b_.back() == 's') {
      if (ends("sses")) {
        b_.resize(b_.size() - 2);
      } else if (ends("ies")) {
        setto("i");
      } else if (b_.size() >= 2 && b_[b_.size() - 2] != 's') {
        b_.pop_back();
      }
    }
    if (ends("eed")) {
      if (m() > 0) b_.pop_back();
    } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
      b_.resize(static_cast<std::size_t>(j_ + 1));
      if (ends("at")) {
        setto("ate");
      } else if (ends("bl")) {
        setto("ble");
      } else if (ends("iz")) {
        setto("ize");
      } else if (doublec(k())) {
        char ch = b_.back();
        if (ch != 'l' && ch != 's' && ch != 'z') b_.pop_back();
      } else {
        j_ = k();
        if (m() == 1 && cvc(k())) b_.push_back('e');
      }
    }
  }

  void step1c() {
    if (ends("y") && vowel_in_stem()) b_.back() = 'i';
  }

  void step2() {
    if (b_.size() < 2) return;
    switch (b_[b_.size() - 2]) {
      case 'a':
        if (ends("ational")) { r("ate"); break; }
        if (ends("tional")) { r("tion"); break; }
        break;
      case 'c':
        if (ends("enci")) { r("ence"); break; }
        if (ends("anci")) { r("ance"); break; }
        break;
      case 'e':
        if (ends("izer")) { r("ize"); break; }
        break;
      case 'l':
        if (ends("bli")) { r("ble"); break; }
        if (ends("alli")) { r("al"); break; }
        if (ends("entli")) { r("ent"); break; }
        if (ends("eli")) { r("e"); break; }
        if (ends("ousli")) { r("ous"); break; }
        break;
      case 'o':
        if (ends("ization")) { r("ize"); break; }
        if (ends("ation")) { r("ate"); break; }
        if (ends("ator")) { r("ate"); break; }
        break;
      case 's':
        if (ends("alism")) { r("al"); break; }
        if (ends("iveness")) { r("ive"); break; }
        if (ends("fulness")) { r("ful"); break; }
        if (ends("ousness")) { r("ous"); break; }
        break;
      case 't':
        if (ends("aliti")) { r("al"); break; }
        if (ends("iviti")) { r("ive"); break; }
        if (ends("biliti")) { r("ble"); break; }
        break;
      case 'g':
        if (ends("logi")) { r("log"); break; }
        break;
      default:
        break;
    }
  }

  void step3() {
    switch (b_.back()) {
      case 'e':
        if (ends("icate")) { r("ic"); break; }
        if (ends("ative")) { r(""); break; }
        if (ends("alize")) { r("al"); break; }
        break;
      case 'i':
        if (ends("iciti")) { r("ic"); break; }
        break;
      case 'l':
        if (ends("ical")) { r("ic"); break; }
        if (ends("ful")) { r(""); break; }
        break;
      case 's':
        if (ends("ness")) { r(""); break; }
        break;
      default:
        break;
    }
  }

  void step4() {
    if (b_.size() < 2) return;
    bool hit = false;
    switch (b_[b_.size() - 2]) {
      case 'a':
        hit = ends("al");
        break;
      case 'c':
        hit = ends("ance") || ends("ence");
        break;
      case 'e':
        hit = ends("er");
        break;
      case 'i':
        hit = ends("ic");
        break;
      case 'l':
        hit = ends("able") || ends("ible");
        break;
      case 'n':
        hit = ends("ant") || ends("ement") || ends("ment") || ends("ent");
        break;
      case 'o':
        if (ends("ion")) {
          hit = j_ >= 0 && (b_[j_] == 's' || b_[j_] == 't');
        } else {
          hit = ends("ou");
        }
        break;
      case 's':
        hit = ends("ism");
        break;
      case 't':
        hit = ends("ate") || ends("iti");
        break;
      case 'u':
        hit = ends("ous");
        break;
      case 'v':
        hit = ends("ive");
        break;
      case 'z':
        hit = ends("ize");
        break;
      default:
        break;
    }
    if (hit && m() > 1) b_.resize(static_cast<std::size_t>(j_ + 1));
  }

  void step5() {
    j_ = k();
    if (b_.back() == 'e') {
      j_ = k() - 1;
      int a = m();
      if (a > 1 || (a == 1 && !cvc(k() - 1))) b_.pop_back();
    }
    j_ = k();
    if (b_.back() == 'l' && doublec(k()) && m() > 1) b_.pop_back();
  }
};

}  // namespace

std::string porter_stem(std::string_view word) { return Stemmer(word).run(); }

}  // namespace logeval
