// Core value types shared by the registry, matchmaker and escrow contracts.

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace edgetrade {

using Rational = boost::multiprecision::cpp_rational;
using Tick = std::uint64_t;

struct UserId {
    std::uint64_t value = 0;

    friend auto operator<=>(const UserId&, const UserId&) = default;
};

class MoneyError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Integer micro-dollars. Overflow and underflow throw instead of wrapping.
class Money {
public:
    static constexpr std::uint64_t kMicrosPerDollar = 1'000'000;

    constexpr Money() = default;
    constexpr explicit Money(std::uint64_t micros) : micros_(micros) {}

    static Money dollars(std::uint64_t whole);

    constexpr std::uint64_t micros() const { return micros_; }
    constexpr bool is_zero() const { return micros_ == 0; }

    Money operator+(Money other) const;
    Money operator-(Money other) const;
    Money operator*(std::uint64_t n) const;
    Money& operator+=(Money other);
    Money& operator-=(Money other);

    friend constexpr auto operator<=>(Money, Money) = default;

    std::string to_string() const;  // "12.345000"

private:
    std::uint64_t micros_ = 0;
};

struct Region {
    std::uint32_t city_index = 0;

    friend auto operator<=>(const Region&, const Region&) = default;
};

// Fixed-length bit vector, length K <= 64. For consumers the bits are
// requirements, for providers they are capabilities.
class ConditionVector {
public:
    static constexpr std::size_t kMaxLength = 64;
    static constexpr std::size_t kDefaultLength = 4;  // cpu, bandwidth, storage, os

    ConditionVector() : ConditionVector(kDefaultLength, 0) {}
    ConditionVector(std::size_t length, std::uint64_t mask);
    ConditionVector(std::initializer_list<int> bits);

    std::size_t length() const { return length_; }
    std::uint64_t mask() const { return mask_; }
    bool test(std::size_t i) const;

    friend bool operator==(const ConditionVector&, const ConditionVector&) = default;

private:
    std::size_t length_;
    std::uint64_t mask_;
};

// Half-open [start_tick, end_tick), never empty.
class TimeWindow {
public:
    TimeWindow(Tick start_tick, Tick end_tick);

    Tick start() const { return start_; }
    Tick end() const { return end_; }
    Tick length() const { return end_ - start_; }

    friend bool operator==(const TimeWindow&, const TimeWindow&) = default;

private:
    Tick start_;
    Tick end_;
};

enum class Role : std::uint8_t { Consumer = 0, ComputeProvider = 1, StorageProvider = 2 };

const char* role_name(Role r);
inline bool is_provider(Role r) { return r != Role::Consumer; }

struct UserSpec {
    UserId id;
    Role role = Role::Consumer;
    Region region;
    Money price;  // bid for consumers, charge for providers
    ConditionVector conditions;
    TimeWindow window{0, 1};
    Money budget;  // consumers only; becomes the escrow deposit
};

// Throws std::invalid_argument describing the first violated field rule.
void validate_spec(const UserSpec& spec);

// |a ∩ b| / |a|: share of the consumer window a that b covers.
Rational overlap_fraction(const TimeWindow& a, const TimeWindow& b);

// overlap_fraction(a, b) >= 3/4, in integer arithmetic.
bool overlap_admissible(const TimeWindow& a, const TimeWindow& b);

// Every consumer requirement bit is covered by a provider capability bit.
bool conditions_satisfied(const ConditionVector& consumer, const ConditionVector& provider);

}  // namespace edgetrade

template <>
struct std::hash<edgetrade::UserId> {
    std::size_t operator()(const edgetrade::UserId& id) const noexcept {
        return std::hash<std::uint64_t>{}(id.value);
    }
};
