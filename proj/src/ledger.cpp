#include "edgetrade/ledger.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <limits>
#include <stdexcept>

namespace edgetrade {

namespace {

constexpr char kChainMagic[8] = {'E', 'T', 'C', 'H', 'A', 'I', 'N', '1'};

void write_ids(ByteWriter& w, const std::vector<UserId>& ids) {
    if (ids.size() > 255) throw std::invalid_argument("too many storage providers for one record");
    w.u8(static_cast<std::uint8_t>(ids.size()));
    for (auto id : ids) w.u64(id.value);
}

std::vector<UserId> read_ids(ByteReader& r) {
    std::vector<UserId> ids(r.u8());
    for (auto& id : ids) id.value = r.u64();
    return ids;
}

Role read_role(ByteReader& r) {
    auto raw = r.u8();
    if (raw > 2) throw DecodeError("bad role byte");
    return static_cast<Role>(raw);
}

}  // namespace

const char* tx_kind_name(TxKind k) {
    switch (k) {
        case TxKind::Registration: return "Registration";
        case TxKind::Engaged: return "Engaged";
        case TxKind::Queued: return "Queued";
        case TxKind::Deposit: return "Deposit";
        case TxKind::TickPayment: return "TickPayment";
        case TxKind::Settled: return "Settled";
        case TxKind::Aborted: return "Aborted";
        case TxKind::ResultDigest: return "ResultDigest";
    }
    return "Unknown";
}

bool is_known_kind(std::uint8_t raw) { return raw >= 1 && raw <= 8; }

Digest compute_tx_hash(std::uint64_t index, TxKind kind, ByteView payload, const Digest& prev) {
    ByteWriter w;
    w.u64(index).u8(static_cast<std::uint8_t>(kind)).raw(payload).raw(prev);
    return sha256(w.bytes());
}

Ledger Ledger::from_transactions(std::vector<LedgerTx> txs) {
    Ledger l;
    l.txs_ = std::move(txs);
    return l;
}

std::uint64_t Ledger::append(TxKind kind, Bytes payload) {
    LedgerTx tx;
    tx.index = txs_.size();
    tx.kind = kind;
    tx.payload = std::move(payload);
    tx.prev_hash = head();
    tx.this_hash = compute_tx_hash(tx.index, tx.kind, tx.payload, tx.prev_hash);
    txs_.push_back(std::move(tx));
    return txs_.back().index;
}

bool Ledger::verify_chain() const {
    Digest prev{};
    for (std::size_t i = 0; i < txs_.size(); ++i) {
        const auto& tx = txs_[i];
        if (tx.index != i) return false;
        if (!is_known_kind(static_cast<std::uint8_t>(tx.kind))) return false;
        if (tx.prev_hash != prev) return false;
        if (compute_tx_hash(tx.index, tx.kind, tx.payload, tx.prev_hash) != tx.this_hash) return false;
        prev = tx.this_hash;
    }
    return true;
}

bool Ledger::verify_result(ByteView result, std::uint64_t index) const {
    if (index >= txs_.size()) throw std::invalid_argument("no transaction at index");
    const auto& tx = txs_[index];
    if (tx.kind != TxKind::ResultDigest) throw std::invalid_argument("transaction is not a ResultDigest");
    const Digest d = result_digest(result);
    return tx.payload.size() == d.size() && std::equal(d.begin(), d.end(), tx.payload.begin());
}

std::size_t Ledger::count(TxKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(txs_.begin(), txs_.end(), [kind](const LedgerTx& t) { return t.kind == kind; }));
}

Bytes Ledger::serialize() const {
    ByteWriter w;
    w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(kChainMagic), sizeof kChainMagic));
    w.u64(txs_.size());
    for (const auto& tx : txs_) {
        if (tx.payload.size() > std::numeric_limits<std::uint32_t>::max() - 77)
            throw std::length_error("payload too large");
        const auto record_len = static_cast<std::uint32_t>(8 + 1 + 4 + tx.payload.size() + 32 + 32);
        w.u32(record_len);
        w.u64(tx.index).u8(static_cast<std::uint8_t>(tx.kind));
        w.u32(static_cast<std::uint32_t>(tx.payload.size())).raw(tx.payload);
        w.raw(tx.prev_hash).raw(tx.this_hash);
    }
    return std::move(w).take();
}

Ledger Ledger::deserialize(ByteView bytes) {
    ByteReader r(bytes);
    auto magic = r.raw(sizeof kChainMagic);
    if (!std::equal(magic.begin(), magic.end(), reinterpret_cast<const std::uint8_t*>(kChainMagic)))
        throw DecodeError("not a chain file");
    const auto n = r.u64();
    std::vector<LedgerTx> txs;
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto record_len = r.u32();
        ByteReader rec(r.raw(record_len));
        LedgerTx tx;
        tx.index = rec.u64();
        const auto kind = rec.u8();
        if (!is_known_kind(kind)) throw DecodeError("unknown transaction kind");
        tx.kind = static_cast<TxKind>(kind);
        auto payload = rec.raw(rec.u32());
        tx.payload.assign(payload.begin(), payload.end());
        auto prev = rec.raw(32);
        std::copy(prev.begin(), prev.end(), tx.prev_hash.begin());
        auto self = rec.raw(32);
        std::copy(self.begin(), self.end(), tx.this_hash.begin());
        rec.expect_done();
        txs.push_back(std::move(tx));
    }
    r.expect_done();
    return from_transactions(std::move(txs));
}

void Ledger::export_file(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const auto bytes = serialize();
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Ledger Ledger::import_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

Bytes RegistrationRecord::encode() const {
    ByteWriter w;
    w.u64(user.value).u8(static_cast<std::uint8_t>(role)).u32(region.city_index).u64(price.micros());
    return std::move(w).take();
}

RegistrationRecord RegistrationRecord::decode(ByteView b) {
    ByteReader r(b);
    RegistrationRecord rec;
    rec.user.value = r.u64();
    rec.role = read_role(r);
    rec.region.city_index = r.u32();
    rec.price = Money(r.u64());
    r.expect_done();
    return rec;
}

Bytes EngagedRecord::encode() const {
    ByteWriter w;
    w.u64(consumer.value).u64(compute_provider.value);
    write_ids(w, storage_providers);
    w.u64(tick);
    return std::move(w).take();
}

EngagedRecord EngagedRecord::decode(ByteView b) {
    ByteReader r(b);
    EngagedRecord rec;
    rec.consumer.value = r.u64();
    rec.compute_provider.value = r.u64();
    rec.storage_providers = read_ids(r);
    rec.tick = r.u64();
    r.expect_done();
    return rec;
}

Bytes QueuedRecord::encode() const {
    ByteWriter w;
    w.u64(consumer.value).u64(tick);
    return std::move(w).take();
}

QueuedRecord QueuedRecord::decode(ByteView b) {
    ByteReader r(b);
    QueuedRecord rec;
    rec.consumer.value = r.u64();
    rec.tick = r.u64();
    r.expect_done();
    return rec;
}

Bytes DepositRecord::encode() const {
    ByteWriter w;
    w.u64(session).u64(consumer.value).u64(amount.micros());
    return std::move(w).take();
}

DepositRecord DepositRecord::decode(ByteView b) {
    ByteReader r(b);
    DepositRecord rec;
    rec.session = r.u64();
    rec.consumer.value = r.u64();
    rec.amount = Money(r.u64());
    r.expect_done();
    return rec;
}

Bytes TickPaymentRecord::encode() const {
    ByteWriter w;
    w.u64(session).u64(tick).u64(compute_amount.micros());
    if (storage_amounts.size() > 255) throw std::invalid_argument("too many storage payments");
    w.u8(static_cast<std::uint8_t>(storage_amounts.size()));
    for (auto m : storage_amounts) w.u64(m.micros());
    return std::move(w).take();
}

TickPaymentRecord TickPaymentRecord::decode(ByteView b) {
    ByteReader r(b);
    TickPaymentRecord rec;
    rec.session = r.u64();
    rec.tick = r.u64();
    rec.compute_amount = Money(r.u64());
    rec.storage_amounts.resize(r.u8());
    for (auto& m : rec.storage_amounts) m = Money(r.u64());
    r.expect_done();
    return rec;
}

Bytes SettledRecord::encode() const {
    ByteWriter w;
    w.u64(session).u64(compute.micros());
    if (storage.size() > 255) throw std::invalid_argument("too many storage payments");
    w.u8(static_cast<std::uint8_t>(storage.size()));
    for (const auto& [id, amt] : storage) w.u64(id.value).u64(amt.micros());
    w.u64(refund.micros());
    return std::move(w).take();
}

SettledRecord SettledRecord::decode(ByteView b) {
    ByteReader r(b);
    SettledRecord rec;
    rec.session = r.u64();
    rec.compute = Money(r.u64());
    rec.storage.resize(r.u8());
    for (auto& [id, amt] : rec.storage) {
        id.value = r.u64();
        amt = Money(r.u64());
    }
    rec.refund = Money(r.u64());
    r.expect_done();
    return rec;
}

Bytes AbortedRecord::encode() const {
    ByteWriter w;
    w.u64(session).u64(refund.micros());
    return std::move(w).take();
}

AbortedRecord AbortedRecord::decode(ByteView b) {
    ByteReader r(b);
    AbortedRecord rec;
    rec.session = r.u64();
    rec.refund = Money(r.u64());
    r.expect_done();
    return rec;
}

}  // namespace edgetrade
