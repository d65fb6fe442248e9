#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace closefields {

// Error taxonomy. CLI maps these to exit codes: usage/parse -> 2,
// BudgetError -> 3, VerifyError -> 1.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct FieldError : Error {
    explicit FieldError(const std::string& msg) : Error(msg) {}
};

// Raised when a computation would need more working precision than the
// caller supplied (pivot certification, coefficient-valuation floors).
struct PrecisionError : Error {
    explicit PrecisionError(const std::string& msg) : Error(msg) {}
};

struct BudgetError : Error {
    explicit BudgetError(const std::string& msg) : Error(msg) {}
};

// A verification discrepancy that the library surfaces instead of patching.
struct VerifyError : Error {
    explicit VerifyError(const std::string& msg) : Error(msg) {}
};

namespace detail {

inline int64_t mod_reduce(int64_t a, int64_t m) {
    int64_t r = a % m;
    return r < 0 ? r + m : r;
}

inline int64_t mul_mod(int64_t a, int64_t b, int64_t m) {
    return static_cast<int64_t>(static_cast<__int128>(a) * b % m);
}

inline int64_t pow_ll(int64_t base, int exp) {
    int64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (base != 0 && r > INT64_MAX / base)
            throw Error("integer overflow in pow_ll");
        r *= base;
    }
    return r;
}

inline bool is_prime(int64_t n) {
    if (n < 2) return false;
    for (int64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace detail

}  // namespace closefields
