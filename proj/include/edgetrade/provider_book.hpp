// AVL tree of providers ordered by (charge, arrival seq).
//
// Lookups are done as fresh root-to-leaf descents so that every candidate
// visit costs O(log n) key comparisons; the descent reports how many nodes it
// touched so the caller can meter it.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "edgetrade/domain.hpp"

namespace edgetrade {

struct BookKey {
    Money charge;
    std::uint64_t seq = 0;

    friend auto operator<=>(const BookKey&, const BookKey&) = default;
};

struct BookEntry {
    BookKey key;
    UserSpec spec;
};

class ProviderBook {
public:
    ProviderBook();
    ProviderBook(ProviderBook&&) noexcept;
    ProviderBook& operator=(ProviderBook&&) noexcept;
    ~ProviderBook();

    // Inserts with the next arrival seq; returns the number of nodes touched
    // on the way down. Throws std::invalid_argument for a duplicate id.
    std::uint32_t insert(const UserSpec& provider);

    // Returns nodes touched, or nullopt when the id is absent.
    std::optional<std::uint32_t> erase(UserId id);

    bool contains(UserId id) const { return index_.contains(id); }
    std::optional<BookKey> key_of(UserId id) const;
    std::size_t size() const { return index_.size(); }
    bool empty() const { return index_.empty(); }
    int height() const;

    struct Descent {
        const BookEntry* entry = nullptr;  // null when no key follows `after`
        std::uint32_t comparisons = 0;     // key comparisons, one per node visited
    };

    // Smallest key strictly greater than `after` (or the minimum when absent).
    Descent successor(const std::optional<BookKey>& after) const;

    std::vector<BookEntry> in_order() const;

    // Full traversal: strict BST ordering, cached heights and AVL balance.
    bool validate() const;

private:
    struct Node;
    using NodePtr = std::unique_ptr<Node>;

    static int h(const NodePtr& n);
    static void update(Node& n);
    static NodePtr rotate_left(NodePtr n);
    static NodePtr rotate_right(NodePtr n);
    static NodePtr rebalance(NodePtr n);
    static NodePtr insert_at(NodePtr n, BookEntry entry, std::uint32_t& touched);
    static NodePtr erase_at(NodePtr n, const BookKey& key, std::uint32_t& touched);
    static NodePtr take_min(NodePtr n, NodePtr& min_out);

    NodePtr root_;
    std::unordered_map<UserId, BookKey> index_;
    std::uint64_t next_seq_ = 0;
};

}  // namespace edgetrade
