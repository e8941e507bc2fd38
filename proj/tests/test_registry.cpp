#include <doctest.h>

#include <set>

#include "edgetrade/registry.hpp"
#include "edgetrade/rng.hpp"

using namespace edgetrade;

namespace {

UserSpec spec(Role role, std::uint32_t city, Money price) {
    UserSpec s;
    s.role = role;
    s.region = Region{city};
    s.price = price;
    s.window = TimeWindow(0, 100);
    if (role == Role::Consumer) s.budget = price;
    return s;
}

struct Fixture {
    Ledger ledger;
    GasMeter gas;
    Registry reg;

    explicit Fixture(std::uint32_t cities = 2) : reg(RegistryConfig{cities, 4, {}}, ledger, gas) {}
};

}  // namespace

TEST_CASE("the first registration gets id 0 and ids then count up") {
    Fixture f;
    CHECK(f.reg.register_user(spec(Role::Consumer, 0, Money(5))) == UserId{0});
    CHECK(f.reg.register_user(spec(Role::ComputeProvider, 1, Money(5))) == UserId{1});
    CHECK(f.reg.size() == 2);
    CHECK(f.ledger.count(TxKind::Registration) == 2);
    const auto rec = RegistrationRecord::decode(f.ledger.at(1).payload);
    CHECK(rec.user == UserId{1});
    CHECK(rec.role == Role::ComputeProvider);
    CHECK(rec.region == Region{1});
}

TEST_CASE("a $5 consumer in city 1 is stored and routed to city 1") {
    Fixture f;
    auto s = spec(Role::Consumer, 1, Money(5'400'000));
    s.budget = s.price;
    const auto id = f.reg.register_user(s);
    CHECK(f.reg.lookup(id)->price == Money(5'400'000));
    CHECK(f.reg.allocate(id) == Region{1});
    CHECK(f.reg.network(Region{1}).queue().size() == 1);
    CHECK(f.reg.network(Region{0}).queue().empty());
}

TEST_CASE("invalid registrations are rejected with a reason") {
    Fixture f;
    auto s = spec(Role::Consumer, 0, Money(5));
    s.budget = Money(4);
    CHECK_THROWS_AS(f.reg.register_user(s), RegistryError);
    CHECK_THROWS_AS(f.reg.register_user(spec(Role::ComputeProvider, 2, Money(1))), RegistryError);
    auto wide = spec(Role::ComputeProvider, 0, Money(1));
    wide.conditions = ConditionVector(6, 0);
    CHECK_THROWS_AS(f.reg.register_user(wide), RegistryError);
    CHECK(f.reg.size() == 0);
    CHECK(f.ledger.size() == 0);
    CHECK(f.reg.next_id() == UserId{0});
}

TEST_CASE("explicit ids must be fresh") {
    Fixture f;
    auto s = spec(Role::ComputeProvider, 0, Money(1));
    s.id = UserId{10};
    CHECK(f.reg.register_with_id(s) == UserId{10});
    CHECK_THROWS_AS(f.reg.register_with_id(s), RegistryError);
    s.id = UserId{3};
    CHECK_THROWS_AS(f.reg.register_with_id(s), RegistryError);
    CHECK(f.reg.register_user(s) == UserId{11});
}

TEST_CASE("providers land only in their own city's book") {
    Fixture f;
    const auto id = f.reg.register_user(spec(Role::ComputeProvider, 0, Money(1)));
    f.reg.allocate(id);
    CHECK(f.reg.network(Region{0}).compute_book().contains(id));
    CHECK_FALSE(f.reg.network(Region{1}).compute_book().contains(id));
}

TEST_CASE("allocating twice is a no-op") {
    Fixture f;
    const auto id = f.reg.register_user(spec(Role::ComputeProvider, 1, Money(1)));
    CHECK(f.reg.allocate(id) == Region{1});
    const auto gas_before = f.gas.grand_total();
    const auto ledger_before = f.ledger.size();
    CHECK(f.reg.allocate(id) == Region{1});
    CHECK(f.gas.grand_total() == gas_before);
    CHECK(f.ledger.size() == ledger_before);
    CHECK(f.reg.network(Region{1}).compute_book().size() == 1);
    CHECK_THROWS_AS(f.reg.allocate(UserId{99}), RegistryError);
}

TEST_CASE("100 users over 4 cities partition exactly by region") {
    Fixture f(4);
    Rng rng(17);
    std::vector<std::set<UserId>> expect(4);
    for (int i = 0; i < 100; ++i) {
        const auto city = static_cast<std::uint32_t>(rng.below(4));
        const auto role = rng.below(2) ? Role::ComputeProvider : Role::StorageProvider;
        const auto id = f.reg.register_user(spec(role, city, Money(1 + rng.below(100))));
        f.reg.allocate(id);
        expect[city].insert(id);
    }
    std::set<UserId> all;
    for (std::uint32_t c = 0; c < 4; ++c) {
        const auto& net = f.reg.network(Region{c});
        std::set<UserId> got;
        for (const auto& e : net.compute_book().in_order()) got.insert(e.spec.id);
        for (const auto& e : net.storage_book().in_order()) got.insert(e.spec.id);
        CHECK(got == expect[c]);
        for (auto id : got) CHECK(all.insert(id).second);
    }
    CHECK(all.size() == 100);
    const auto ids = f.reg.user_ids();
    CHECK(std::set<UserId>(ids.begin(), ids.end()) == all);
}

TEST_CASE("deregistration removes the user everywhere") {
    Fixture f;
    const auto p = f.reg.register_user(spec(Role::ComputeProvider, 0, Money(9)));
    const auto c = f.reg.register_user(spec(Role::Consumer, 0, Money(1)));
    f.reg.allocate(p);
    f.reg.allocate(c);
    f.reg.deregister(p);
    f.reg.deregister(c);
    CHECK_FALSE(f.reg.lookup(p).has_value());
    CHECK(f.reg.network(Region{0}).compute_book().empty());
    CHECK(f.reg.network(Region{0}).queue().empty());
    CHECK_THROWS_AS(f.reg.deregister(p), RegistryError);
}

TEST_CASE("a user in an active session cannot leave") {
    Fixture f;
    const auto p = f.reg.register_user(spec(Role::ComputeProvider, 0, Money(1)));
    f.reg.enter_session(p);
    CHECK(f.reg.in_session(p));
    CHECK_THROWS_AS(f.reg.deregister(p), RegistryError);
    f.reg.leave_session(p);
    CHECK_THROWS_AS(f.reg.leave_session(p), RegistryError);
    CHECK_NOTHROW(f.reg.deregister(p));
}

TEST_CASE("engagements surface through the registry outbox") {
    Fixture f;
    const auto c = f.reg.register_user(spec(Role::Consumer, 0, Money(5)));
    f.reg.allocate(c);
    CHECK(f.reg.take_engagements().empty());
    const auto p = f.reg.register_user(spec(Role::ComputeProvider, 0, Money(5)));
    f.reg.allocate(p);
    const auto out = f.reg.take_engagements();
    REQUIRE(out.size() == 1);
    CHECK(out[0].consumer == c);
    CHECK(out[0].compute_provider == p);
    CHECK(f.reg.take_engagements().empty());
}

TEST_CASE("identical registration sequences cost identical gas") {
    auto run = [] {
        Fixture f(3);
        Rng rng(5);
        for (int i = 0; i < 60; ++i) {
            const auto role = static_cast<Role>(rng.below(3));
            const auto id = f.reg.register_user(spec(role, static_cast<std::uint32_t>(rng.below(3)),
                                                     Money(1 + rng.below(10))));
            f.reg.allocate(id);
        }
        return std::make_pair(f.gas.grand_total(), f.ledger.head());
    };
    CHECK(run() == run());
}

TEST_CASE("registration ids in the ledger strictly increase") {
    Fixture f;
    for (int i = 0; i < 20; ++i) f.reg.register_user(spec(Role::StorageProvider, 0, Money(1)));
    std::uint64_t last = 0;
    bool first = true;
    for (const auto& tx : f.ledger.transactions()) {
        const auto id = RegistrationRecord::decode(tx.payload).user.value;
        if (!first) CHECK(id > last);
        last = id;
        first = false;
    }
}
