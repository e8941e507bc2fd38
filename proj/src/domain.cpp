#include "edgetrade/domain.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace edgetrade {

Money Money::dollars(std::uint64_t whole) {
    if (whole > std::numeric_limits<std::uint64_t>::max() / kMicrosPerDollar)
        throw MoneyError("money overflow");
    return Money(whole * kMicrosPerDollar);
}

Money Money::operator+(Money other) const {
    if (micros_ > std::numeric_limits<std::uint64_t>::max() - other.micros_)
        throw MoneyError("money overflow");
    return Money(micros_ + other.micros_);
}

Money Money::operator-(Money other) const {
    if (other.micros_ > micros_) throw MoneyError("money underflow");
    return Money(micros_ - other.micros_);
}

Money Money::operator*(std::uint64_t n) const {
    if (n != 0 && micros_ > std::numeric_limits<std::uint64_t>::max() / n)
        throw MoneyError("money overflow");
    return Money(micros_ * n);
}

Money& Money::operator+=(Money other) { return *this = *this + other; }
Money& Money::operator-=(Money other) { return *this = *this - other; }

std::string Money::to_string() const {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%llu.%06llu",
                  static_cast<unsigned long long>(micros_ / kMicrosPerDollar),
                  static_cast<unsigned long long>(micros_ % kMicrosPerDollar));
    return buf;
}

ConditionVector::ConditionVector(std::size_t length, std::uint64_t mask)
    : length_(length), mask_(mask) {
    if (length == 0 || length > kMaxLength)
        throw std::invalid_argument("condition vector length must be in [1, 64]");
    if (length < kMaxLength && (mask >> length) != 0)
        throw std::invalid_argument("condition mask has bits beyond its length");
}

ConditionVector::ConditionVector(std::initializer_list<int> bits) : length_(bits.size()), mask_(0) {
    if (length_ == 0 || length_ > kMaxLength)
        throw std::invalid_argument("condition vector length must be in [1, 64]");
    std::size_t i = 0;
    for (int b : bits) {
        if (b != 0 && b != 1) throw std::invalid_argument("condition bits must be 0 or 1");
        if (b) mask_ |= std::uint64_t{1} << i;
        ++i;
    }
}

bool ConditionVector::test(std::size_t i) const {
    if (i >= length_) throw std::out_of_range("condition index");
    return (mask_ >> i) & 1U;
}

TimeWindow::TimeWindow(Tick start_tick, Tick end_tick) : start_(start_tick), end_(end_tick) {
    if (start_tick >= end_tick) throw std::invalid_argument("time window must satisfy start < end");
}

const char* role_name(Role r) {
    switch (r) {
        case Role::Consumer: return "consumer";
        case Role::ComputeProvider: return "compute_provider";
        case Role::StorageProvider: return "storage_provider";
    }
    return "unknown";
}

void validate_spec(const UserSpec& spec) {
    if (spec.role == Role::Consumer) {
        if (spec.budget < spec.price)
            throw std::invalid_argument("consumer budget is below its own bid");
        if (spec.budget.is_zero()) throw std::invalid_argument("consumer budget is zero");
    }
    if (static_cast<std::uint8_t>(spec.role) > 2) throw std::invalid_argument("unknown role");
}

static Tick intersection(const TimeWindow& a, const TimeWindow& b) {
    const Tick lo = std::max(a.start(), b.start());
    const Tick hi = std::min(a.end(), b.end());
    return hi > lo ? hi - lo : 0;
}

Rational overlap_fraction(const TimeWindow& a, const TimeWindow& b) {
    return Rational(intersection(a, b), a.length());
}

bool overlap_admissible(const TimeWindow& a, const TimeWindow& b) {
    using boost::multiprecision::uint128_t;
    return uint128_t(intersection(a, b)) * 4 >= uint128_t(a.length()) * 3;
}

bool conditions_satisfied(const ConditionVector& consumer, const ConditionVector& provider) {
    if (consumer.length() != provider.length())
        throw std::invalid_argument("condition vectors differ in length");
    return (consumer.mask() & ~provider.mask()) == 0;
}

}  // namespace edgetrade
