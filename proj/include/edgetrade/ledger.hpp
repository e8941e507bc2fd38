// Single-writer hash-chained transaction log.
//
// Each transaction commits to its predecessor through prev_hash, and
// this_hash = sha256(index_be64 || kind || payload || prev_hash). There is no
// consensus and no batching; every event is its own transaction.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgetrade/bytes.hpp"
#include "edgetrade/digest.hpp"
#include "edgetrade/domain.hpp"

namespace edgetrade {

enum class TxKind : std::uint8_t {
    Registration = 1,
    Engaged = 2,
    Queued = 3,
    Deposit = 4,
    TickPayment = 5,
    Settled = 6,
    Aborted = 7,
    ResultDigest = 8,
};

const char* tx_kind_name(TxKind k);
bool is_known_kind(std::uint8_t raw);

struct LedgerTx {
    std::uint64_t index = 0;
    TxKind kind = TxKind::Registration;
    Bytes payload;
    Digest prev_hash{};
    Digest this_hash{};
};

Digest compute_tx_hash(std::uint64_t index, TxKind kind, ByteView payload, const Digest& prev);

class Ledger {
public:
    Ledger() = default;

    // Rebuilds a ledger from raw transactions without checking them; call
    // verify_chain() to audit what was loaded.
    static Ledger from_transactions(std::vector<LedgerTx> txs);

    std::uint64_t append(TxKind kind, Bytes payload);

    bool verify_chain() const;

    // Throws std::invalid_argument when index is out of range or does not
    // hold a ResultDigest transaction.
    bool verify_result(ByteView result, std::uint64_t index) const;

    std::size_t size() const { return txs_.size(); }
    const LedgerTx& at(std::uint64_t index) const { return txs_.at(index); }
    std::span<const LedgerTx> transactions() const { return txs_; }
    Digest head() const { return txs_.empty() ? Digest{} : txs_.back().this_hash; }

    std::size_t count(TxKind kind) const;

    Bytes serialize() const;
    static Ledger deserialize(ByteView bytes);

    void export_file(const std::filesystem::path& path) const;
    static Ledger import_file(const std::filesystem::path& path);

private:
    std::vector<LedgerTx> txs_;
};

// Canonical payloads, one struct per transaction kind. Field order is fixed
// and integers are big-endian so hashes are reproducible.

struct RegistrationRecord {
    UserId user;
    Role role = Role::Consumer;
    Region region;
    Money price;

    Bytes encode() const;
    static RegistrationRecord decode(ByteView b);
};

struct EngagedRecord {
    UserId consumer;
    UserId compute_provider;
    std::vector<UserId> storage_providers;
    Tick tick = 0;

    Bytes encode() const;
    static EngagedRecord decode(ByteView b);
};

struct QueuedRecord {
    UserId consumer;
    Tick tick = 0;

    Bytes encode() const;
    static QueuedRecord decode(ByteView b);
};

struct DepositRecord {
    std::uint64_t session = 0;
    UserId consumer;
    Money amount;

    Bytes encode() const;
    static DepositRecord decode(ByteView b);
};

struct TickPaymentRecord {
    std::uint64_t session = 0;
    Tick tick = 0;
    Money compute_amount;
    std::vector<Money> storage_amounts;

    Bytes encode() const;
    static TickPaymentRecord decode(ByteView b);
};

struct SettledRecord {
    std::uint64_t session = 0;
    Money compute;
    std::vector<std::pair<UserId, Money>> storage;
    Money refund;

    Bytes encode() const;
    static SettledRecord decode(ByteView b);
};

struct AbortedRecord {
    std::uint64_t session = 0;
    Money refund;

    Bytes encode() const;
    static AbortedRecord decode(ByteView b);
};

}  // namespace edgetrade
