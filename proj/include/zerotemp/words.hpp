#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

#include "error.hpp"

namespace zerotemp {

using Rational = boost::rational<std::int64_t>;

// Finite word over {0, .., alphabet-1}. Symbols are stored as raw byte values.
class Word {
public:
    Word() = default;
    explicit Word(int alphabet) : alphabet_(check_alphabet(alphabet)) {}

    // Builds from raw symbol values; every byte must be below the alphabet size.
    static Word from_symbols(std::string symbols, int alphabet = 2) {
        Word w(alphabet);
        for (unsigned char s : symbols)
            if (s >= alphabet) fail(ErrorKind::InvalidInput, "symbol out of range for alphabet");
        w.data_ = std::move(symbols);
        return w;
    }

    // Parses the text form "01000".
    static Word parse(std::string_view text, int alphabet = 2) {
        Word w(alphabet);
        w.data_.reserve(text.size());
        for (char ch : text) {
            int s = ch - '0';
            if (s < 0 || s >= alphabet)
                fail(ErrorKind::InvalidInput, "invalid symbol '" + std::string(1, ch) + "' for alphabet of size " +
                                                  std::to_string(alphabet));
            w.data_.push_back(static_cast<char>(s));
        }
        return w;
    }

    std::string str() const {
        std::string out(data_);
        for (char& ch : out) ch = static_cast<char>('0' + ch);
        return out;
    }

    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }
    int alphabet() const noexcept { return alphabet_; }
    int operator[](std::size_t i) const { return static_cast<unsigned char>(data_[i]); }
    const std::string& symbols() const noexcept { return data_; }

    Word substr(std::size_t pos, std::size_t len) const {
        Word w(alphabet_);
        w.data_ = data_.substr(pos, len);
        return w;
    }

    friend bool operator==(const Word& a, const Word& b) {
        return a.alphabet_ == b.alphabet_ && a.data_ == b.data_;
    }
    friend bool operator<(const Word& a, const Word& b) {
        if (a.data_ != b.data_) return a.data_ < b.data_;
        return a.alphabet_ < b.alphabet_;
    }

private:
    static int check_alphabet(int alphabet) {
        if (alphabet != 2 && alphabet != 3) fail(ErrorKind::InvalidInput, "alphabet size must be 2 or 3");
        return alphabet;
    }

    std::string data_;
    int alphabet_ = 2;

    friend Word concat(const Word&, const Word&);
    friend Word power(const Word&, std::size_t);
};

inline Word concat(const Word& a, const Word& b) {
    if (a.alphabet() != b.alphabet()) fail(ErrorKind::InvalidInput, "alphabet mismatch in concat");
    Word w(a.alphabet());
    w.data_.reserve(a.size() + b.size());
    w.data_ = a.data_;
    w.data_ += b.data_;
    return w;
}

inline Word power(const Word& a, std::size_t k) {
    Word w(a.alphabet());
    w.data_.reserve(a.size() * k);
    for (std::size_t i = 0; i < k; ++i) w.data_ += a.data_;
    return w;
}

inline Rational frequency(const Word& u, int symbol) {
    if (u.empty()) fail(ErrorKind::InvalidInput, "frequency of the empty word");
    std::int64_t count = 0;
    for (unsigned char s : u.symbols()) count += (s == symbol);
    return Rational(count, static_cast<std::int64_t>(u.size()));
}

// True iff w occurs contiguously in u.
inline bool is_factor(const Word& w, const Word& u) {
    if (w.alphabet() != u.alphabet()) fail(ErrorKind::InvalidInput, "alphabet mismatch in is_factor");
    return u.symbols().find(w.symbols()) != std::string::npos;
}

inline std::set<Word> factors(const Word& u, std::size_t n) {
    std::set<Word> out;
    if (n == 0 || n > u.size()) return out;
    for (std::size_t i = 0; i + n <= u.size(); ++i) out.insert(u.substr(i, n));
    return out;
}

}  // namespace zerotemp

template <>
struct std::hash<zerotemp::Word> {
    std::size_t operator()(const zerotemp::Word& w) const noexcept {
        return std::hash<std::string>{}(w.symbols()) ^ static_cast<std::size_t>(w.alphabet());
    }
};
