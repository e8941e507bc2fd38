#include "edgetrade/registry.hpp"

#include <string>
#include <utility>

namespace edgetrade {

Registry::Registry(RegistryConfig cfg, Ledger& ledger, GasMeter& gas) : cfg_(cfg), ledger_(ledger), gas_(gas) {
    if (cfg_.cities == 0) throw std::invalid_argument("at least one city is required");
    networks_.reserve(cfg_.cities);
    for (std::uint32_t c = 0; c < cfg_.cities; ++c)
        networks_.emplace_back(Region{c}, cfg_.condition_length, cfg_.match, &ledger_, &gas_);
}

UserId Registry::store(UserSpec spec) {
    try {
        validate_spec(spec);
    } catch (const std::invalid_argument& e) {
        throw RegistryError(std::string("registration rejected: ") + e.what());
    }
    if (spec.region.city_index >= cfg_.cities) throw RegistryError("registration rejected: unknown region");
    if (spec.conditions.length() != cfg_.condition_length)
        throw RegistryError("registration rejected: condition vector length mismatch");

    const UserId id = spec.id;
    next_id_ = UserId{id.value + 1};
    users_.emplace(id, Record{spec});
    gas_.charge_user(id, GasKind::StorageWrite, 1);
    gas_.charge_user(id, GasKind::MapInsert, 1);
    ledger_.append(TxKind::Registration, RegistrationRecord{id, spec.role, spec.region, spec.price}.encode());
    return id;
}

UserId Registry::register_user(UserSpec spec) {
    spec.id = next_id_;
    return store(std::move(spec));
}

UserId Registry::register_with_id(UserSpec spec) {
    if (users_.contains(spec.id) || spec.id < next_id_)
        throw RegistryError("registration rejected: duplicate or stale explicit id");
    return store(std::move(spec));
}

const Registry::Record& Registry::record(UserId id) const {
    auto it = users_.find(id);
    if (it == users_.end()) throw RegistryError("unknown user id " + std::to_string(id.value));
    return it->second;
}

Registry::Record& Registry::mutable_record(UserId id) {
    return const_cast<Record&>(std::as_const(*this).record(id));
}

Region Registry::allocate(UserId id) {
    auto& rec = mutable_record(id);
    if (rec.allocated) return rec.spec.region;
    auto& net = networks_[rec.spec.region.city_index];
    auto engaged = net.admit(rec.spec);
    rec.allocated = true;
    for (auto& e : engaged) outbox_.push_back(std::move(e));
    return rec.spec.region;
}

void Registry::deregister(UserId id) {
    const auto& rec = record(id);
    if (rec.active_sessions > 0) throw RegistryError("user is serving an active session");
    if (rec.allocated) {
        auto& net = networks_[rec.spec.region.city_index];
        if (rec.spec.role == Role::Consumer)
            net.remove_consumer(id);
        else
            net.remove_provider(id);
    }
    gas_.charge_user(id, GasKind::MapDelete, 1);
    users_.erase(id);
}

void Registry::enter_session(UserId id) { ++mutable_record(id).active_sessions; }

void Registry::leave_session(UserId id) {
    auto& rec = mutable_record(id);
    if (rec.active_sessions == 0) throw RegistryError("user has no active session");
    --rec.active_sessions;
}

bool Registry::in_session(UserId id) const { return record(id).active_sessions > 0; }

std::optional<UserSpec> Registry::lookup(UserId id) const {
    auto it = users_.find(id);
    if (it == users_.end()) return std::nullopt;
    return it->second.spec;
}

bool Registry::is_allocated(UserId id) const { return record(id).allocated; }

std::vector<Engagement> Registry::take_engagements() {
    std::vector<Engagement> out;
    out.swap(outbox_);
    return out;
}

Matchmaker& Registry::network(Region r) { return networks_.at(r.city_index); }
const Matchmaker& Registry::network(Region r) const { return networks_.at(r.city_index); }

std::vector<UserId> Registry::user_ids() const {
    std::vector<UserId> out;
    out.reserve(users_.size());
    for (const auto& [id, _] : users_) out.push_back(id);
    return out;
}

}  // namespace edgetrade
