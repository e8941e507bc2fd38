#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "edgetrade/provider_book.hpp"
#include "edgetrade/rng.hpp"

using namespace edgetrade;

namespace {

UserSpec provider(std::uint64_t id, std::uint64_t charge) {
    UserSpec s;
    s.id = UserId{id};
    s.role = Role::ComputeProvider;
    s.price = Money(charge);
    return s;
}

double avl_height_bound(std::size_t n) { return 1.45 * std::log2(static_cast<double>(n) + 2); }

}  // namespace

TEST_CASE("a single insert gives height 1") {
    ProviderBook b;
    b.insert(provider(1, 5));
    CHECK(b.size() == 1);
    CHECK(b.height() == 1);
    CHECK(b.validate());
}

TEST_CASE("127 distinct charges stay within height 10") {
    ProviderBook b;
    for (std::uint64_t i = 0; i < 127; ++i) b.insert(provider(i, i));
    CHECK(b.height() <= 10);
    CHECK(b.validate());
}

TEST_CASE("equal charges come out in arrival order") {
    ProviderBook b;
    b.insert(provider(9, 5));
    b.insert(provider(3, 5));
    b.insert(provider(7, 4));
    const auto v = b.in_order();
    REQUIRE(v.size() == 3);
    CHECK(v[0].spec.id == UserId{7});
    CHECK(v[1].spec.id == UserId{9});
    CHECK(v[2].spec.id == UserId{3});
    CHECK_THROWS_AS(b.insert(provider(9, 1)), std::invalid_argument);
}

TEST_CASE("successor walks the order one fresh descent at a time") {
    ProviderBook b;
    Rng rng(12);
    for (std::uint64_t i = 0; i < 200; ++i) b.insert(provider(i, rng.below(50)));
    const auto order = b.in_order();
    std::optional<BookKey> after;
    for (const auto& e : order) {
        const auto d = b.successor(after);
        REQUIRE(d.entry != nullptr);
        CHECK(d.entry->spec.id == e.spec.id);
        CHECK(d.comparisons <= static_cast<std::uint32_t>(b.height()));
        after = d.entry->key;
    }
    CHECK(b.successor(after).entry == nullptr);
    CHECK(ProviderBook{}.successor(std::nullopt).entry == nullptr);
}

TEST_CASE("random insert and erase keep the AVL invariants") {
    Rng rng(21);
    ProviderBook b;
    std::map<std::uint64_t, std::uint64_t> model;  // id -> charge
    std::uint64_t next = 0;
    for (int step = 0; step < 4000; ++step) {
        if (model.empty() || rng.below(3) != 0) {
            const auto c = rng.below(100);
            b.insert(provider(next, c));
            model[next++] = c;
        } else {
            auto it = std::next(model.begin(), static_cast<long>(rng.below(model.size())));
            const auto before = b.size();
            CHECK(b.erase(UserId{it->first}).has_value());
            CHECK(b.size() == before - 1);
            model.erase(it);
        }
        if (step % 97 == 0) {
            REQUIRE(b.validate());
            CHECK(b.height() <= avl_height_bound(b.size()));
        }
    }
    CHECK(b.size() == model.size());
    CHECK_FALSE(b.erase(UserId{next + 5}).has_value());
    const auto v = b.in_order();
    CHECK(std::is_sorted(v.begin(), v.end(), [](const BookEntry& x, const BookEntry& y) { return x.key < y.key; }));
    for (const auto& e : v) CHECK(model.at(e.spec.id.value) == e.key.charge.micros());
}

TEST_CASE("key_of reports the stored key") {
    ProviderBook b;
    b.insert(provider(4, 8));
    b.insert(provider(5, 8));
    CHECK(b.key_of(UserId{5})->seq == 1);
    CHECK(b.key_of(UserId{4})->charge == Money(8));
    CHECK_FALSE(b.key_of(UserId{6}).has_value());
}

TEST_CASE("books move without losing entries") {
    ProviderBook a;
    for (std::uint64_t i = 0; i < 10; ++i) a.insert(provider(i, i));
    ProviderBook b(std::move(a));
    CHECK(b.size() == 10);
    ProviderBook c;
    c = std::move(b);
    CHECK(c.size() == 10);
    CHECK(c.validate());
}
