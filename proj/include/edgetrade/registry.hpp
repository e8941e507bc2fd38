// Distributed controller: registration, id assignment and routing of users to
// their region's matchmaker.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "edgetrade/domain.hpp"
#include "edgetrade/gasmeter.hpp"
#include "edgetrade/ledger.hpp"
#include "edgetrade/matchmaker.hpp"

namespace edgetrade {

class RegistryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RegistryConfig {
    std::uint32_t cities = 2;
    std::size_t condition_length = ConditionVector::kDefaultLength;
    MatchPolicy match;
};

class Registry {
public:
    Registry(RegistryConfig cfg, Ledger& ledger, GasMeter& gas);

    Registry(const Registry&) = delete;
    Registry& operator=(const Registry&) = delete;

    // Assigns the next id; spec.id is ignored. Throws RegistryError for an
    // invalid spec.
    UserId register_user(UserSpec spec);

    // Keeps spec.id, which must not be below the next free id.
    UserId register_with_id(UserSpec spec);

    // Routes the user into its region's network. A second call for the same
    // id does nothing and returns the same region.
    Region allocate(UserId id);

    // Throws RegistryError if the id is unknown or the user is in an active
    // escrow session.
    void deregister(UserId id);

    // Session membership, maintained by whoever opens and settles sessions.
    void enter_session(UserId id);
    void leave_session(UserId id);
    bool in_session(UserId id) const;

    std::optional<UserSpec> lookup(UserId id) const;
    bool is_allocated(UserId id) const;
    std::size_t size() const { return users_.size(); }
    UserId next_id() const { return next_id_; }

    // Engagements produced by allocations since the last call.
    std::vector<Engagement> take_engagements();

    Matchmaker& network(Region r);
    const Matchmaker& network(Region r) const;
    std::uint32_t cities() const { return cfg_.cities; }

    std::vector<UserId> user_ids() const;

private:
    struct Record {
        UserSpec spec;
        bool allocated = false;
        std::uint32_t active_sessions = 0;
    };

    UserId store(UserSpec spec);
    const Record& record(UserId id) const;
    Record& mutable_record(UserId id);

    RegistryConfig cfg_;
    Ledger& ledger_;
    GasMeter& gas_;
    UserId next_id_{0};
    std::map<UserId, Record> users_;
    std::vector<Matchmaker> networks_;
    std::vector<Engagement> outbox_;
};

}  // namespace edgetrade
