#include "edgetrade/provider_book.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace edgetrade {

struct ProviderBook::Node {
    BookEntry entry;
    int height = 1;
    NodePtr left;
    NodePtr right;
};

ProviderBook::ProviderBook() = default;
ProviderBook::~ProviderBook() = default;
ProviderBook::ProviderBook(ProviderBook&&) noexcept = default;
ProviderBook& ProviderBook::operator=(ProviderBook&&) noexcept = default;

std::optional<BookKey> ProviderBook::key_of(UserId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

int ProviderBook::h(const NodePtr& n) { return n ? n->height : 0; }

void ProviderBook::update(Node& n) { n.height = 1 + std::max(h(n.left), h(n.right)); }

ProviderBook::NodePtr ProviderBook::rotate_left(NodePtr n) {
    NodePtr r = std::move(n->right);
    n->right = std::move(r->left);
    update(*n);
    r->left = std::move(n);
    update(*r);
    return r;
}

ProviderBook::NodePtr ProviderBook::rotate_right(NodePtr n) {
    NodePtr l = std::move(n->left);
    n->left = std::move(l->right);
    update(*n);
    l->right = std::move(n);
    update(*l);
    return l;
}

ProviderBook::NodePtr ProviderBook::rebalance(NodePtr n) {
    update(*n);
    const int balance = h(n->left) - h(n->right);
    if (balance > 1) {
        if (h(n->left->left) < h(n->left->right)) n->left = rotate_left(std::move(n->left));
        return rotate_right(std::move(n));
    }
    if (balance < -1) {
        if (h(n->right->right) < h(n->right->left)) n->right = rotate_right(std::move(n->right));
        return rotate_left(std::move(n));
    }
    return n;
}

ProviderBook::NodePtr ProviderBook::insert_at(NodePtr n, BookEntry entry, std::uint32_t& touched) {
    if (!n) {
        ++touched;
        auto node = std::make_unique<Node>();
        node->entry = std::move(entry);
        return node;
    }
    ++touched;
    if (entry.key < n->entry.key)
        n->left = insert_at(std::move(n->left), std::move(entry), touched);
    else
        n->right = insert_at(std::move(n->right), std::move(entry), touched);
    return rebalance(std::move(n));
}

ProviderBook::NodePtr ProviderBook::take_min(NodePtr n, NodePtr& min_out) {
    if (!n->left) {
        NodePtr rest = std::move(n->right);
        min_out = std::move(n);
        return rest;
    }
    n->left = take_min(std::move(n->left), min_out);
    return rebalance(std::move(n));
}

ProviderBook::NodePtr ProviderBook::erase_at(NodePtr n, const BookKey& key, std::uint32_t& touched) {
    if (!n) return n;
    ++touched;
    if (key < n->entry.key) {
        n->left = erase_at(std::move(n->left), key, touched);
    } else if (n->entry.key < key) {
        n->right = erase_at(std::move(n->right), key, touched);
    } else {
        if (!n->left) return std::move(n->right);
        if (!n->right) return std::move(n->left);
        NodePtr successor;
        NodePtr right = take_min(std::move(n->right), successor);
        successor->left = std::move(n->left);
        successor->right = std::move(right);
        n = std::move(successor);
    }
    return rebalance(std::move(n));
}

std::uint32_t ProviderBook::insert(const UserSpec& provider) {
    if (!is_provider(provider.role)) throw std::invalid_argument("only providers can enter a provider book");
    if (index_.contains(provider.id)) throw std::invalid_argument("provider already in book");
    BookKey key{provider.price, next_seq_++};
    std::uint32_t touched = 0;
    root_ = insert_at(std::move(root_), BookEntry{key, provider}, touched);
    index_.emplace(provider.id, key);
    return touched;
}

std::optional<std::uint32_t> ProviderBook::erase(UserId id) {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    std::uint32_t touched = 0;
    root_ = erase_at(std::move(root_), it->second, touched);
    index_.erase(it);
    return touched;
}

int ProviderBook::height() const { return h(root_); }

ProviderBook::Descent ProviderBook::successor(const std::optional<BookKey>& after) const {
    Descent d;
    const Node* n = root_.get();
    while (n) {
        ++d.comparisons;
        if (!after || *after < n->entry.key) {
            d.entry = &n->entry;
            n = n->left.get();
        } else {
            n = n->right.get();
        }
    }
    return d;
}

std::vector<BookEntry> ProviderBook::in_order() const {
    std::vector<BookEntry> out;
    out.reserve(size());
    std::function<void(const Node*)> walk = [&](const Node* n) {
        if (!n) return;
        walk(n->left.get());
        out.push_back(n->entry);
        walk(n->right.get());
    };
    walk(root_.get());
    return out;
}

bool ProviderBook::validate() const {
    bool ok = true;
    std::size_t count = 0;
    const BookKey* prev = nullptr;
    std::function<int(const Node*)> walk = [&](const Node* n) -> int {
        if (!n) return 0;
        const int lh = walk(n->left.get());
        if (prev && !(*prev < n->entry.key)) ok = false;
        prev = &n->entry.key;
        ++count;
        auto idx = index_.find(n->entry.spec.id);
        if (idx == index_.end() || idx->second != n->entry.key) ok = false;
        const int rh = walk(n->right.get());
        if (std::abs(lh - rh) > 1) ok = false;
        const int height = 1 + std::max(lh, rh);
        if (height != n->height) ok = false;
        return height;
    };
    walk(root_.get());
    return ok && count == index_.size();
}

}  // namespace edgetrade
