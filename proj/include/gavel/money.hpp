#pragma once

#include <cstdint>
#include <string>

#include "gavel/errors.hpp"
#include "gavel/util.hpp"

namespace gavel {

/// Monetary amount in integer cents. All compensation arithmetic is exact;
/// fractions appear only inside formula evaluation and are rounded half-up
/// to cents at the very end.
struct Money {
    int64_t cents = 0;

    constexpr Money() = default;
    constexpr explicit Money(int64_t c) : cents(c) {}

    static constexpr Money from_units(int64_t units) { return Money(units * 100); }

    friend constexpr bool operator==(Money a, Money b) { return a.cents == b.cents; }
    friend constexpr bool operator!=(Money a, Money b) { return a.cents != b.cents; }
    friend constexpr bool operator<(Money a, Money b) { return a.cents < b.cents; }
    friend constexpr bool operator>(Money a, Money b) { return a.cents > b.cents; }
    friend constexpr Money operator+(Money a, Money b) { return Money(a.cents + b.cents); }
    friend constexpr Money operator-(Money a, Money b) { return Money(a.cents - b.cents); }
};

/// Parses "12000", "12000.5", "12,000.50". At most two decimal places.
inline Money parse_money(const std::string& text) {
    std::string s = trim(text);
    if (!s.empty() && s[0] == '$') s = s.substr(1);
    std::string digits;
    for (char c : s)
        if (c != ',') digits.push_back(c);
    if (digits.empty()) throw ValidationError("empty money amount", "amount");

    bool neg = false;
    size_t i = 0;
    if (digits[0] == '-') {
        neg = true;
        i = 1;
    }
    int64_t whole = 0;
    bool any = false;
    for (; i < digits.size() && digits[i] != '.'; ++i) {
        if (digits[i] < '0' || digits[i] > '9')
            throw ValidationError("invalid money amount: " + text, "amount");
        whole = whole * 10 + (digits[i] - '0');
        any = true;
    }
    int64_t frac = 0;
    if (i < digits.size()) {
        ++i; // skip '.'
        int places = 0;
        for (; i < digits.size(); ++i, ++places) {
            if (digits[i] < '0' || digits[i] > '9' || places >= 2)
                throw ValidationError("invalid money amount: " + text, "amount");
            frac = frac * 10 + (digits[i] - '0');
            any = true;
        }
        if (places == 1) frac *= 10;
    }
    if (!any) throw ValidationError("invalid money amount: " + text, "amount");
    int64_t cents = whole * 100 + frac;
    return Money(neg ? -cents : cents);
}

inline std::string format_money(Money m) {
    int64_t c = m.cents;
    bool neg = c < 0;
    if (neg) c = -c;
    std::string out = std::to_string(c / 100);
    int64_t frac = c % 100;
    if (frac != 0) {
        out += '.';
        out += static_cast<char>('0' + frac / 10);
        if (frac % 10) out += static_cast<char>('0' + frac % 10);
    }
    return neg ? "-" + out : out;
}

} // namespace gavel
