#include "edgetrade/escrow.hpp"

#include <string>

namespace edgetrade {

const char* session_state_name(SessionState s) {
    switch (s) {
        case SessionState::Provisioned: return "Provisioned";
        case SessionState::KeysExchanged: return "KeysExchanged";
        case SessionState::Distributed: return "Distributed";
        case SessionState::DhtVerified: return "DhtVerified";
        case SessionState::Computing: return "Computing";
        case SessionState::Settled: return "Settled";
    }
    return "?";
}

Money Settlement::storage_total() const {
    Money sum;
    for (const auto& [_, m] : storage_payments) sum += m;
    return sum;
}

Money Settlement::total() const { return compute_payment + storage_total() + refund; }

Money Session::paid_storage_total() const {
    Money sum;
    for (auto m : paid_storage) sum += m;
    return sum;
}

Money Session::paid_total() const { return paid_compute + paid_storage_total(); }

Money Session::remaining() const { return deposit - paid_total(); }

Money Session::tick_debit() const { return compute_rate + storage_rate * paid_storage.size(); }

Escrow::Escrow(EscrowConfig cfg, const CryptoScheme& scheme, Ledger& ledger, GasMeter& gas)
    : cfg_(cfg), scheme_(scheme), ledger_(ledger), gas_(gas), next_id_(cfg.first_session_id) {
    if (cfg_.comm_interval == 0 || cfg_.setup_share == 0)
        throw std::invalid_argument("comm_interval and setup_share must be >= 1");
    if (cfg_.storage_rate_pct > 100) throw std::invalid_argument("storage_rate_pct must be <= 100");
}

std::uint64_t Escrow::open_session(const Engagement& e, Money budget) {
    const Money rate{e.compute_charge.micros() / 100 * cfg_.storage_rate_pct +
                     e.compute_charge.micros() % 100 * cfg_.storage_rate_pct / 100};
    return open_session(e, budget, rate);
}

std::uint64_t Escrow::open_session(const Engagement& e, Money budget, Money storage_rate) {
    if (budget.is_zero()) throw std::invalid_argument("session rejected: zero budget");
    const auto key = std::make_tuple(e.consumer.value, e.compute_provider.value, e.region.city_index, e.matched_tick);
    if (opened_.contains(key)) throw ProtocolError("engagement already has a session");

    const auto id = next_id_;
    Slot s;
    s.session.id = id;
    s.session.engagement = e;
    s.session.deposit = budget;
    s.session.compute_rate = e.compute_charge;
    s.session.storage_rate = storage_rate;
    s.session.paid_storage.assign(e.storage_providers.size(), Money{});
    s.session.vms.push_back({e.compute_provider, ++vm_counter_});
    for (auto sp : e.storage_providers) s.session.vms.push_back({sp, ++vm_counter_});
    (void)s.session.tick_debit();  // overflow surfaces here, before any state changes

    if ((next_id_ - cfg_.first_session_id) % cfg_.setup_share == 0) gas_.charge_session(id, GasKind::ContractSetup, 1);
    gas_.charge_session(id, GasKind::StorageWrite, 1);
    gas_.charge_session(id, GasKind::MapInsert, 1);
    ledger_.append(TxKind::Deposit, DepositRecord{id, e.consumer, budget}.encode());

    opened_.insert(key);
    sessions_.emplace(id, std::move(s));
    ++next_id_;
    return id;
}

Escrow::Slot& Escrow::slot(std::uint64_t id) {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw std::invalid_argument("unknown session " + std::to_string(id));
    return it->second;
}

const Escrow::Slot& Escrow::slot(std::uint64_t id) const {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw std::invalid_argument("unknown session " + std::to_string(id));
    return it->second;
}

const Session& Escrow::session(std::uint64_t id) const { return slot(id).session; }

const std::optional<Settlement>& Escrow::settlement(std::uint64_t id) const { return slot(id).settlement; }

void Escrow::require(const Session& s, SessionState expected, const char* op) const {
    if (s.state != expected)
        throw ProtocolError(std::string(op) + " needs state " + session_state_name(expected) + ", session is " +
                            session_state_name(s.state));
}

void Escrow::record_key_exchange(std::uint64_t id, PublicKey consumer, PublicKey provider) {
    auto& s = slot(id).session;
    require(s, SessionState::Provisioned, "record_key_exchange");
    s.consumer_key = std::move(consumer);
    s.provider_key = std::move(provider);
    s.state = SessionState::KeysExchanged;
    gas_.charge_session(id, GasKind::StorageWrite, 2);
}

void Escrow::record_distribution(std::uint64_t id, SignedDht dht) {
    auto& s = slot(id).session;
    require(s, SessionState::KeysExchanged, "record_distribution");
    if (dht.canonical.empty()) throw std::invalid_argument("distribution rejected: empty DHT");
    s.dht = std::move(dht);
    s.state = SessionState::Distributed;
    gas_.charge_session(id, GasKind::StorageWrite, 1);
}

std::optional<Settlement> Escrow::verify_and_start(std::uint64_t id) {
    auto& sl = slot(id);
    auto& s = sl.session;
    require(s, SessionState::Distributed, "verify_and_start");
    gas_.charge_session(id, GasKind::StorageRead, 1);
    gas_.charge_session(id, GasKind::SignatureVerify, 1);

    bool ok = false;
    try {
        ok = verify_dht(*s.dht, *s.consumer_key, scheme_);
    } catch (const DecodeError&) {
        ok = false;
    }
    if (!ok) return settle(sl, true);

    s.state = SessionState::DhtVerified;
    s.verified = true;
    s.state = SessionState::Computing;
    return std::nullopt;
}

std::optional<Settlement> Escrow::tick(std::uint64_t id) {
    auto& sl = slot(id);
    auto& s = sl.session;
    require(s, SessionState::Computing, "tick");
    const Money debit = s.tick_debit();
    if (s.remaining() < debit) return settle(sl, false);

    s.paid_compute += s.compute_rate;
    for (auto& p : s.paid_storage) p += s.storage_rate;
    ++s.ticks_served;
    gas_.charge_session(id, GasKind::StorageWrite, 1);
    if (s.ticks_served % cfg_.comm_interval == 0) gas_.charge_session(id, GasKind::MessageEmit, 1);
    ledger_.append(TxKind::TickPayment,
                   TickPaymentRecord{id, s.ticks_served, s.compute_rate,
                                     std::vector<Money>(s.paid_storage.size(), s.storage_rate)}
                       .encode());

    if (s.remaining() < debit) return settle(sl, false);
    return std::nullopt;
}

Settlement Escrow::checkout(std::uint64_t id) {
    auto& sl = slot(id);
    require(sl.session, SessionState::Computing, "checkout");
    return settle(sl, false);
}

Settlement Escrow::settle(Slot& sl, bool aborted) {
    auto& s = sl.session;
    Settlement out;
    out.session = s.id;
    out.compute_payment = s.paid_compute;
    for (std::size_t i = 0; i < s.paid_storage.size(); ++i)
        out.storage_payments.emplace_back(s.engagement.storage_providers[i], s.paid_storage[i]);
    out.refund = s.remaining();
    out.aborted = aborted;

    if (aborted) {
        ledger_.append(TxKind::Aborted, AbortedRecord{s.id, out.refund}.encode());
    } else {
        ledger_.append(TxKind::Settled, SettledRecord{s.id, out.compute_payment, out.storage_payments, out.refund}.encode());
    }
    gas_.charge_session(s.id, GasKind::StorageWrite, 1 + out.storage_payments.size());
    gas_.charge_session(s.id, GasKind::MessageEmit, 1);

    s.aborted = aborted;
    s.state = SessionState::Settled;
    sl.settlement = out;
    return out;
}

}  // namespace edgetrade
