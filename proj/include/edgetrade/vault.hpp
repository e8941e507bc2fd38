// Secure data plane for one engagement: chunking, per-task hybrid encryption,
// replicated placement on storage nodes, the signed task-id -> node table, and
// per-dataset access control.
//
// Storage nodes only ever hold ciphertext and the consumer's signature. The
// wrapped per-task keys stay in the vault's key store and are released one at
// a time to trusted requesters.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "edgetrade/bytes.hpp"
#include "edgetrade/crypto.hpp"
#include "edgetrade/domain.hpp"

namespace edgetrade {

using PeerId = UserId;
using DatasetId = std::uint64_t;

struct Chunk {
    std::uint32_t task_id = 0;
    Bytes plaintext;
};

// Sequential task ids from 0. Throws std::invalid_argument for empty data or
// chunk_size == 0.
std::vector<Chunk> chunk_data(ByteView data, std::size_t chunk_size);

// Sorts by task id; throws std::invalid_argument unless ids are exactly 0..n-1.
Bytes reassemble(std::vector<Chunk> chunks);

struct AccessPolicy {
    std::map<PeerId, PublicKey> trusted;

    bool trusts(PeerId p) const { return trusted.contains(p); }
};

struct TaskChunk {
    std::uint32_t task_id = 0;
    Bytes payload;  // ciphertext
    std::map<PeerId, Bytes> wrapped_keys;
    Bytes signature;  // consumer signature over task_id_be32 || payload
    std::uint32_t plain_len = 0;

    friend bool operator==(const TaskChunk&, const TaskChunk&) = default;
};

Bytes chunk_signing_message(std::uint32_t task_id, ByteView payload);

// Throws std::invalid_argument when the policy trusts nobody.
std::vector<TaskChunk> encrypt_and_sign(const std::vector<Chunk>& chunks, DatasetId dataset, const KeyPair& consumer,
                                        const AccessPolicy& policy, const CryptoScheme& scheme);

bool verify_chunk(const TaskChunk& chunk, const PublicKey& consumer, const CryptoScheme& scheme);

// Unwraps the requester's task key and decrypts; nullopt when the requester
// holds no wrapped key or anything fails to authenticate.
std::optional<Bytes> open_chunk(const TaskChunk& chunk, DatasetId dataset, PeerId requester, const PrivateKey& key,
                                const CryptoScheme& scheme);

// task id -> storage node addresses. Canonical bytes, sorted by task id:
//   repeat { task_id: u32 be, count: u8, count x node id: u64 be }
class Dht {
public:
    // Throws std::invalid_argument for an empty or duplicate address list.
    void place(std::uint32_t task_id, std::vector<PeerId> nodes);

    const std::map<std::uint32_t, std::vector<PeerId>>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    // Key set is exactly {0..n-1}.
    bool complete(std::size_t n) const;

    Bytes canonical() const;
    // Throws DecodeError unless the bytes are canonical.
    static Dht parse(ByteView bytes);

    friend bool operator==(const Dht&, const Dht&) = default;

private:
    std::map<std::uint32_t, std::vector<PeerId>> entries_;
};

struct SignedDht {
    Bytes canonical;
    Bytes signature;
};

SignedDht sign_dht(const Dht& dht, const KeyPair& consumer, const CryptoScheme& scheme);

// Throws DecodeError when the serialization is malformed.
bool verify_dht(const SignedDht& sd, const PublicKey& consumer, const CryptoScheme& scheme);

struct StoredChunk {
    std::uint32_t task_id = 0;
    Bytes payload;
    Bytes signature;
    std::uint32_t plain_len = 0;
};

struct StorageNode {
    PeerId id;
    bool up = true;
    std::map<std::pair<DatasetId, std::uint32_t>, StoredChunk> chunks;
};

// The single response for "not allowed" and "no such chunk".
struct AccessDenied {
    friend bool operator==(const AccessDenied&, const AccessDenied&) = default;
};

class ChunkUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A trusted requester receives the chunk with only its own wrapped key.
using FetchResult = std::variant<TaskChunk, AccessDenied>;

class Vault {
public:
    void add_storage_node(PeerId id);
    void set_node_up(PeerId id, bool up);
    const StorageNode& node(PeerId id) const;
    std::vector<PeerId> node_ids() const;

    // Task t goes to nodes[(t + j) % nodes.size()] for j in [0, r). Throws
    // std::invalid_argument if r is 0 or exceeds the node count, or if a node
    // is unknown.
    Dht distribute(DatasetId dataset, const std::vector<TaskChunk>& chunks, const std::vector<PeerId>& nodes,
                   std::uint32_t r, const AccessPolicy& policy);

    // Throws ChunkUnavailable when a trusted requester asks for an existing
    // chunk whose replicas are all down.
    FetchResult fetch_chunk(PeerId requester, DatasetId dataset, std::uint32_t task_id) const;

    const Dht& dht(DatasetId dataset) const { return datasets_.at(dataset).dht; }

private:
    struct Dataset {
        Dht dht;
        AccessPolicy policy;
        std::map<std::uint32_t, std::map<PeerId, Bytes>> key_store;
    };

    std::map<PeerId, StorageNode> nodes_;
    std::map<DatasetId, Dataset> datasets_;
};

}  // namespace edgetrade
