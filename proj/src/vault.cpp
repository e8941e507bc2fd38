#include "edgetrade/vault.hpp"

#include <algorithm>
#include <set>

namespace edgetrade {

namespace {

Bytes associated_data(DatasetId dataset, std::uint32_t task_id) {
    ByteWriter w;
    w.u64(dataset).u32(task_id);
    return std::move(w).take();
}

Bytes task_key(const KeyPair& consumer, DatasetId dataset, std::uint32_t task_id) {
    ByteWriter w;
    w.raw(ByteView(reinterpret_cast<const std::uint8_t*>("task-key"), 8)).u64(dataset).u32(task_id);
    return hmac_sha256(consumer.priv.bytes, w.bytes());
}

}  // namespace

std::vector<Chunk> chunk_data(ByteView data, std::size_t chunk_size) {
    if (data.empty()) throw std::invalid_argument("nothing to chunk: data is empty");
    if (chunk_size == 0) throw std::invalid_argument("chunk size must be >= 1");
    if ((data.size() - 1) / chunk_size >= UINT32_MAX) throw std::invalid_argument("too many chunks");
    std::vector<Chunk> out;
    out.reserve((data.size() + chunk_size - 1) / chunk_size);
    for (std::size_t off = 0; off < data.size(); off += chunk_size) {
        const auto n = std::min(chunk_size, data.size() - off);
        out.push_back({static_cast<std::uint32_t>(out.size()), Bytes(data.begin() + off, data.begin() + off + n)});
    }
    return out;
}

Bytes reassemble(std::vector<Chunk> chunks) {
    std::sort(chunks.begin(), chunks.end(), [](const Chunk& a, const Chunk& b) { return a.task_id < b.task_id; });
    Bytes out;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        if (chunks[i].task_id != i) throw std::invalid_argument("chunk ids are not exactly 0..n-1");
        out.insert(out.end(), chunks[i].plaintext.begin(), chunks[i].plaintext.end());
    }
    return out;
}

Bytes chunk_signing_message(std::uint32_t task_id, ByteView payload) {
    ByteWriter w;
    w.u32(task_id).raw(payload);
    return std::move(w).take();
}

std::vector<TaskChunk> encrypt_and_sign(const std::vector<Chunk>& chunks, DatasetId dataset, const KeyPair& consumer,
                                        const AccessPolicy& policy, const CryptoScheme& scheme) {
    if (policy.trusted.empty()) throw std::invalid_argument("access policy trusts no peer");
    std::vector<TaskChunk> out;
    out.reserve(chunks.size());
    for (const auto& c : chunks) {
        TaskChunk t;
        t.task_id = c.task_id;
        t.plain_len = static_cast<std::uint32_t>(c.plaintext.size());
        const auto key = task_key(consumer, dataset, c.task_id);
        t.payload = seal_symmetric(key, c.plaintext, associated_data(dataset, c.task_id));
        for (const auto& [peer, pub] : policy.trusted) t.wrapped_keys.emplace(peer, scheme.encrypt(pub, key));
        t.signature = scheme.sign(consumer.priv, chunk_signing_message(t.task_id, t.payload));
        out.push_back(std::move(t));
    }
    return out;
}

bool verify_chunk(const TaskChunk& chunk, const PublicKey& consumer, const CryptoScheme& scheme) {
    return scheme.verify(consumer, chunk_signing_message(chunk.task_id, chunk.payload), chunk.signature);
}

std::optional<Bytes> open_chunk(const TaskChunk& chunk, DatasetId dataset, PeerId requester, const PrivateKey& key,
                                const CryptoScheme& scheme) {
    auto it = chunk.wrapped_keys.find(requester);
    if (it == chunk.wrapped_keys.end()) return std::nullopt;
    auto sym = scheme.decrypt(key, it->second);
    if (!sym) return std::nullopt;
    auto plain = open_symmetric(*sym, chunk.payload, associated_data(dataset, chunk.task_id));
    if (plain && plain->size() != chunk.plain_len) return std::nullopt;
    return plain;
}

void Dht::place(std::uint32_t task_id, std::vector<PeerId> nodes) {
    if (nodes.empty()) throw std::invalid_argument("dht entry needs at least one node");
    if (nodes.size() > 255) throw std::invalid_argument("too many replicas for one entry");
    std::set<PeerId> uniq(nodes.begin(), nodes.end());
    if (uniq.size() != nodes.size()) throw std::invalid_argument("dht entry repeats a node");
    entries_[task_id] = std::move(nodes);
}

bool Dht::complete(std::size_t n) const {
    if (entries_.size() != n) return false;
    std::uint32_t expect = 0;
    for (const auto& [id, _] : entries_)
        if (id != expect++) return false;
    return true;
}

Bytes Dht::canonical() const {
    ByteWriter w;
    for (const auto& [task, nodes] : entries_) {
        w.u32(task).u8(static_cast<std::uint8_t>(nodes.size()));
        for (auto n : nodes) w.u64(n.value);
    }
    return std::move(w).take();
}

Dht Dht::parse(ByteView bytes) {
    Dht d;
    ByteReader r(bytes);
    std::optional<std::uint32_t> prev;
    while (!r.done()) {
        const auto task = r.u32();
        if (prev && task <= *prev) throw DecodeError("dht entries not strictly ascending");
        prev = task;
        const auto count = r.u8();
        if (count == 0) throw DecodeError("dht entry without nodes");
        std::vector<PeerId> nodes(count);
        for (auto& n : nodes) n.value = r.u64();
        std::set<PeerId> uniq(nodes.begin(), nodes.end());
        if (uniq.size() != nodes.size()) throw DecodeError("dht entry repeats a node");
        d.entries_.emplace(task, std::move(nodes));
    }
    return d;
}

SignedDht sign_dht(const Dht& dht, const KeyPair& consumer, const CryptoScheme& scheme) {
    SignedDht sd;
    sd.canonical = dht.canonical();
    sd.signature = scheme.sign(consumer.priv, sd.canonical);
    return sd;
}

bool verify_dht(const SignedDht& sd, const PublicKey& consumer, const CryptoScheme& scheme) {
    (void)Dht::parse(sd.canonical);
    return scheme.verify(consumer, sd.canonical, sd.signature);
}

void Vault::add_storage_node(PeerId id) { nodes_.try_emplace(id, StorageNode{id, true, {}}); }

void Vault::set_node_up(PeerId id, bool up) { nodes_.at(id).up = up; }

const StorageNode& Vault::node(PeerId id) const { return nodes_.at(id); }

std::vector<PeerId> Vault::node_ids() const {
    std::vector<PeerId> out;
    for (const auto& [id, _] : nodes_) out.push_back(id);
    return out;
}

Dht Vault::distribute(DatasetId dataset, const std::vector<TaskChunk>& chunks, const std::vector<PeerId>& nodes,
                      std::uint32_t r, const AccessPolicy& policy) {
    if (r == 0) throw std::invalid_argument("replication must be >= 1");
    if (r > nodes.size()) throw std::invalid_argument("replication exceeds storage node count");
    if (chunks.empty()) throw std::invalid_argument("no chunks to distribute");
    for (auto n : nodes)
        if (!nodes_.contains(n)) throw std::invalid_argument("unknown storage node");
    if (std::set<PeerId>(nodes.begin(), nodes.end()).size() != nodes.size())
        throw std::invalid_argument("storage node listed twice");

    Dataset ds;
    ds.policy = policy;
    for (const auto& c : chunks) {
        std::vector<PeerId> placed;
        for (std::uint32_t j = 0; j < r; ++j) {
            const auto target = nodes[(c.task_id + j) % nodes.size()];
            nodes_.at(target).chunks[{dataset, c.task_id}] = StoredChunk{c.task_id, c.payload, c.signature, c.plain_len};
            placed.push_back(target);
        }
        ds.dht.place(c.task_id, std::move(placed));
        ds.key_store[c.task_id] = c.wrapped_keys;
    }
    Dht out = ds.dht;
    datasets_[dataset] = std::move(ds);
    return out;
}

FetchResult Vault::fetch_chunk(PeerId requester, DatasetId dataset, std::uint32_t task_id) const {
    auto ds = datasets_.find(dataset);
    if (ds == datasets_.end() || !ds->second.policy.trusts(requester)) return AccessDenied{};
    auto entry = ds->second.dht.entries().find(task_id);
    if (entry == ds->second.dht.entries().end()) return AccessDenied{};
    const auto& keys = ds->second.key_store.at(task_id);
    auto key = keys.find(requester);
    if (key == keys.end()) return AccessDenied{};

    for (auto node_id : entry->second) {
        const auto& node = nodes_.at(node_id);
        if (!node.up) continue;
        auto stored = node.chunks.find({dataset, task_id});
        if (stored == node.chunks.end()) continue;
        TaskChunk out;
        out.task_id = task_id;
        out.payload = stored->second.payload;
        out.signature = stored->second.signature;
        out.plain_len = stored->second.plain_len;
        out.wrapped_keys.emplace(requester, key->second);
        return out;
    }
    throw ChunkUnavailable("every replica of the chunk is down");
}

}  // namespace edgetrade
