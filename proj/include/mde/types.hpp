#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace mde {

/// Dense handle of a registered property set. Index 0 is always the empty set.
class SetIndex {
public:
    using value_type = std::uint32_t;

    constexpr SetIndex() noexcept = default;
    constexpr explicit SetIndex(value_type v) noexcept : value_(v) {}

    [[nodiscard]] constexpr value_type value() const noexcept { return value_; }
    [[nodiscard]] constexpr bool is_empty_set() const noexcept { return value_ == 0; }

    friend constexpr auto operator<=>(SetIndex, SetIndex) noexcept = default;

    friend std::ostream& operator<<(std::ostream& os, SetIndex i) { return os << i.value_; }

private:
    value_type value_ = 0;
};

inline constexpr SetIndex kEmptySet{0};
inline constexpr std::size_t kMaxSetCount = std::numeric_limits<SetIndex::value_type>::max();

/// Equality of registered sets reduces to handle equality.
[[nodiscard]] constexpr bool indices_equal(SetIndex a, SetIndex b) noexcept { return a == b; }

/// Misuse of the engine API: unknown or evicted index, unsorted input, etc.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Raised when the index space is exhausted.
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Malformed or inconsistent snapshot document.
class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RegisterResult {
    SetIndex index;
    bool fresh = false;
};

namespace detail {

inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) noexcept {
    return mix64(seed + 0x9e3779b97f4a7c15ULL + v);
}

}  // namespace detail
}  // namespace mde

template <>
struct std::hash<mde::SetIndex> {
    std::size_t operator()(mde::SetIndex i) const noexcept {
        return static_cast<std::size_t>(mde::detail::mix64(i.value()));
    }
};
