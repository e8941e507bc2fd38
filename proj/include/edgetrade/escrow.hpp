// Intermediary contract for one engagement at a time per session: holds the
// consumer deposit, walks the six-step handshake, pays providers once per tick
// and settles on checkout.
//
// Conservation holds on every path to Settled:
//   compute_payment + sum(storage_payments) + refund == deposit.
// No provider is paid before the signed DHT has verified.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "edgetrade/crypto.hpp"
#include "edgetrade/gasmeter.hpp"
#include "edgetrade/ledger.hpp"
#include "edgetrade/matchmaker.hpp"
#include "edgetrade/vault.hpp"

namespace edgetrade {

enum class SessionState : std::uint8_t {
    Provisioned,
    KeysExchanged,
    Distributed,
    DhtVerified,
    Computing,
    Settled,
};

const char* session_state_name(SessionState s);

// Thrown for calls made in the wrong state; the session is left untouched.
class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct VmHandle {
    UserId owner;
    std::uint64_t handle = 0;
};

struct Settlement {
    std::uint64_t session = 0;
    Money compute_payment;
    std::vector<std::pair<UserId, Money>> storage_payments;
    Money refund;
    bool aborted = false;

    Money storage_total() const;
    // compute + storage + refund; equals the deposit.
    Money total() const;
};

struct Session {
    std::uint64_t id = 0;
    Engagement engagement;
    Money deposit;
    Money compute_rate;
    Money storage_rate;  // per storage provider per tick
    Money paid_compute;
    std::vector<Money> paid_storage;  // parallel to engagement.storage_providers
    SessionState state = SessionState::Provisioned;
    std::uint64_t ticks_served = 0;
    bool verified = false;
    bool aborted = false;
    std::optional<PublicKey> consumer_key;
    std::optional<PublicKey> provider_key;
    std::optional<SignedDht> dht;
    std::vector<VmHandle> vms;

    Money paid_storage_total() const;
    Money paid_total() const;
    Money remaining() const;
    Money tick_debit() const;
};

struct EscrowConfig {
    std::uint32_t storage_rate_pct = 20;  // of the compute charge, rounded down
    std::uint32_t comm_interval = 1;      // ticks between status messages
    std::uint32_t setup_share = 1;        // sessions per contract setup
    std::uint64_t first_session_id = 0;
};

class Escrow {
public:
    Escrow(EscrowConfig cfg, const CryptoScheme& scheme, Ledger& ledger, GasMeter& gas);

    // Step 1. Throws std::invalid_argument for a zero budget and ProtocolError
    // when the engagement already had a session.
    std::uint64_t open_session(const Engagement& e, Money budget);
    std::uint64_t open_session(const Engagement& e, Money budget, Money storage_rate);

    // Step 2.
    void record_key_exchange(std::uint64_t id, PublicKey consumer, PublicKey provider);

    // Steps 3-5. The signature is not looked at here. Throws
    // std::invalid_argument when the DHT carries no task.
    void record_distribution(std::uint64_t id, SignedDht dht);

    // Step 6. Returns the abort settlement (full refund) when the DHT fails to
    // verify against the consumer key; nullopt once Computing.
    std::optional<Settlement> verify_and_start(std::uint64_t id);

    // Pays one tick. Returns a settlement when the deposit can no longer cover
    // the following tick (or this one).
    std::optional<Settlement> tick(std::uint64_t id);

    Settlement checkout(std::uint64_t id);

    const Session& session(std::uint64_t id) const;
    const std::optional<Settlement>& settlement(std::uint64_t id) const;
    std::size_t session_count() const { return sessions_.size(); }
    const EscrowConfig& config() const { return cfg_; }

private:
    struct Slot {
        Session session;
        std::optional<Settlement> settlement;
    };

    Slot& slot(std::uint64_t id);
    const Slot& slot(std::uint64_t id) const;
    void require(const Session& s, SessionState expected, const char* op) const;
    Settlement settle(Slot& slot, bool aborted);

    EscrowConfig cfg_;
    const CryptoScheme& scheme_;
    Ledger& ledger_;
    GasMeter& gas_;
    std::map<std::uint64_t, Slot> sessions_;
    std::set<std::tuple<std::uint64_t, std::uint64_t, std::uint32_t, Tick>> opened_;
    std::uint64_t next_id_;
    std::uint64_t vm_counter_ = 0;
};

}  // namespace edgetrade
