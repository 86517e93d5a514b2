#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "fdlab/error.hpp"

namespace fdlab {

// Binary word a_1...a_n packed into a uint64 with a_1 in the most significant
// used bit, so numeric order of bits() is lexicographic order of words and
// Word(i, n) for i = 0..2^n-1 enumerates {0,1}^n lexicographically.
class Word {
public:
    static constexpr int kMaxLength = 64;

    constexpr Word() = default;

    Word(std::uint64_t bits, int length) : bits_(bits), length_(length) {
        if (length < 0 || length > kMaxLength)
            throw DomainError("word length must lie in [0, 64]");
        if (length < 64 && (bits >> length) != 0)
            throw DomainError("word bits exceed its length");
    }

    static Word from_string(std::string_view s) {
        if (s.size() > static_cast<std::size_t>(kMaxLength))
            throw DomainError("word longer than 64 letters");
        std::uint64_t bits = 0;
        for (char c : s) {
            if (c != '0' && c != '1')
                throw DomainError("word letters must be 0 or 1");
            bits = (bits << 1) | static_cast<std::uint64_t>(c - '0');
        }
        return Word(bits, static_cast<int>(s.size()));
    }

    int size() const { return length_; }
    bool empty() const { return length_ == 0; }
    std::uint64_t bits() const { return bits_; }

    // Letter at 0-based position i (i = 0 is a_1).
    int operator[](int i) const {
        return static_cast<int>((bits_ >> (length_ - 1 - i)) & 1u);
    }

    Word concat(const Word& tail) const {
        if (length_ + tail.length_ > kMaxLength)
            throw DomainError("concatenated word longer than 64 letters");
        if (tail.length_ == 64) return tail;
        return Word((bits_ << tail.length_) | tail.bits_, length_ + tail.length_);
    }

    Word prefix(int m) const {
        if (m < 0 || m > length_) throw DomainError("prefix length out of range");
        if (m == 0) return Word();
        return Word(bits_ >> (length_ - m), m);
    }

    Word suffix(int m) const {
        if (m < 0 || m > length_) throw DomainError("suffix length out of range");
        if (m == 64) return *this;
        return Word(bits_ & ((std::uint64_t{1} << m) - 1), m);
    }

    std::string to_string() const {
        std::string s(static_cast<std::size_t>(length_), '0');
        for (int i = 0; i < length_; ++i) s[static_cast<std::size_t>(i)] = static_cast<char>('0' + (*this)[i]);
        return s;
    }

    friend bool operator==(const Word& a, const Word& b) {
        return a.length_ == b.length_ && a.bits_ == b.bits_;
    }

private:
    std::uint64_t bits_ = 0;
    int length_ = 0;
};

inline std::uint64_t word_count(int n) {
    if (n < 0 || n > 63) throw DomainError("word count requires 0 <= n <= 63");
    return std::uint64_t{1} << n;
}

} // namespace fdlab
