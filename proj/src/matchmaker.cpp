#include "edgetrade/matchmaker.hpp"

#include <bit>
#include <stdexcept>

namespace edgetrade {

std::uint32_t descent_comparison_bound(std::size_t book_size, std::size_t condition_length) {
    // ceil(log2(n + 1)) is the bit width of n.
    const auto depth = static_cast<std::uint32_t>(std::bit_width(book_size));
    return 2 * depth + static_cast<std::uint32_t>(condition_length) + 2;
}

Rational eng_rate(std::size_t engagements, std::size_t total_consumers) {
    if (total_consumers == 0) throw std::invalid_argument("eng_rate needs at least one consumer");
    if (engagements > total_consumers) throw std::invalid_argument("more engagements than consumers");
    return Rational(engagements, total_consumers);
}

bool compute_admissible(const UserSpec& consumer, const UserSpec& provider) {
    return provider.price <= consumer.price && conditions_satisfied(consumer.conditions, provider.conditions) &&
           overlap_admissible(consumer.window, provider.window);
}

bool storage_admissible(const UserSpec& consumer, const UserSpec& provider) {
    return conditions_satisfied(consumer.conditions, provider.conditions) &&
           overlap_admissible(consumer.window, provider.window);
}

Matchmaker::Matchmaker(Region region, std::size_t condition_length, MatchPolicy policy, Ledger* ledger,
                       GasMeter* gas)
    : region_(region), condition_length_(condition_length), policy_(policy), ledger_(ledger), gas_(gas) {
    if (policy_.eng_batch == 0) throw std::invalid_argument("eng_batch must be >= 1");
}

void Matchmaker::check_member(const UserSpec& user) const {
    if (user.region != region_) throw std::invalid_argument("user belongs to another region");
    if (user.conditions.length() != condition_length_)
        throw std::invalid_argument("condition vector length differs from the scenario's");
}

Matchmaker::Search Matchmaker::find_compute(const UserSpec& consumer, std::optional<BookKey> after) {
    Search s;
    const auto k = static_cast<std::uint32_t>(condition_length_);
    std::uint32_t touched = 0;
    while (true) {
        const auto d = compute_.successor(after);
        std::uint32_t c = d.comparisons;
        touched += d.comparisons;
        ++s.descents;
        bool stop = d.entry == nullptr;
        bool ok = false;
        if (!stop) {
            ++c;  // price
            if (d.entry->spec.price <= consumer.price) {
                c += k;
                if (conditions_satisfied(consumer.conditions, d.entry->spec.conditions)) {
                    ++c;
                    ok = overlap_admissible(consumer.window, d.entry->spec.window);
                }
            } else {
                stop = true;
            }
        }
        s.comparisons += c;
        if (observer_) observer_({compute_.size(), c, false});
        if (stop) break;
        if (ok) {
            s.found = d.entry;
            break;
        }
        after = d.entry->key;
    }
    if (gas_) {
        gas_->charge_user(consumer.id, GasKind::TreeNodeTouch, touched);
        gas_->charge_user(consumer.id, GasKind::Comparison, s.comparisons);
    }
    return s;
}

std::optional<BookEntry> Matchmaker::recheck(WaitingConsumer& w, std::uint32_t& comparisons) {
    const auto k = static_cast<std::uint32_t>(condition_length_);
    std::optional<BookEntry> best;
    std::uint32_t c = 0;
    for (std::size_t i = w.arrivals_checked; i < compute_arrivals_.size(); ++i) {
        const auto& p = compute_arrivals_[i];
        const auto key = compute_.key_of(p.id);
        if (!key) continue;
        if (gas_) gas_->charge_user(w.spec.id, GasKind::StorageRead, 1);
        ++c;  // price
        if (p.price > w.spec.price) continue;
        c += k;
        if (!conditions_satisfied(w.spec.conditions, p.conditions)) continue;
        ++c;
        if (!overlap_admissible(w.spec.window, p.window)) continue;
        if (best) {
            ++c;  // against the running minimum
            if (!(*key < best->key)) continue;
        }
        best = BookEntry{*key, p};
    }
    w.arrivals_checked = compute_arrivals_.size();
    comparisons += c;
    if (gas_) gas_->charge_user(w.spec.id, GasKind::Comparison, c);
    return best;
}

std::vector<UserId> Matchmaker::pick_storage(const UserSpec& consumer, std::uint32_t& comparisons,
                                             std::uint32_t& descents) {
    std::vector<UserId> picked;
    const auto k = static_cast<std::uint32_t>(condition_length_);
    std::optional<BookKey> after;
    std::uint32_t touched = 0;
    std::uint32_t spent = 0;
    while (picked.size() < policy_.replication) {
        const auto d = storage_.successor(after);
        std::uint32_t c = d.comparisons;
        touched += d.comparisons;
        ++descents;
        if (d.entry) {
            c += k;
            if (conditions_satisfied(consumer.conditions, d.entry->spec.conditions)) {
                ++c;
                if (overlap_admissible(consumer.window, d.entry->spec.window))
                    picked.push_back(d.entry->spec.id);
            }
        }
        spent += c;
        if (observer_) observer_({storage_.size(), c, true});
        if (!d.entry) break;
        after = d.entry->key;
    }
    comparisons += spent;
    if (gas_) {
        gas_->charge_user(consumer.id, GasKind::TreeNodeTouch, touched);
        gas_->charge_user(consumer.id, GasKind::Comparison, spent);
    }
    return picked;
}

Engagement Matchmaker::engage(const UserSpec& consumer, const BookEntry& provider, Tick tick, Tick enqueued,
                              std::uint32_t comparisons, std::uint32_t descents, std::size_t queue_len) {
    const auto erased = compute_.erase(provider.spec.id);
    if (gas_) {
        gas_->charge_user(consumer.id, GasKind::TreeNodeTouch, erased.value_or(0));
        gas_->charge_user(consumer.id, GasKind::MapDelete, 1);
    }
    Engagement e;
    e.consumer = consumer.id;
    e.compute_provider = provider.spec.id;
    e.region = region_;
    e.compute_charge = provider.spec.price;
    e.matched_tick = tick;
    e.latency_ticks = tick - enqueued;
    e.queue_length_at_enqueue = queue_len;
    e.storage_providers = pick_storage(consumer, comparisons, descents);
    e.storage_shortfall = policy_.replication - static_cast<std::uint32_t>(e.storage_providers.size());
    e.comparisons_used = comparisons;
    e.descents = descents;

    if (ledger_)
        ledger_->append(TxKind::Engaged,
                        EngagedRecord{e.consumer, e.compute_provider, e.storage_providers, tick}.encode());
    if (gas_) gas_->charge_user(consumer.id, GasKind::StorageWrite, 1);
    last_engaged_ = consumer.id;
    if (++pending_notifications_ == policy_.eng_batch) {
        if (gas_) gas_->charge_user(consumer.id, GasKind::MessageEmit, 1);
        pending_notifications_ = 0;
    }
    return e;
}

void Matchmaker::flush_notifications() {
    if (pending_notifications_ > 0 && last_engaged_ && gas_)
        gas_->charge_user(*last_engaged_, GasKind::MessageEmit, 1);
    pending_notifications_ = 0;
}

MatchOutcome Matchmaker::match_consumer(const UserSpec& consumer, Tick tick) {
    if (consumer.role != Role::Consumer) throw std::invalid_argument("match_consumer needs a consumer");
    check_member(consumer);
    auto s = find_compute(consumer);
    if (s.found) {
        const BookEntry chosen = *s.found;
        return engage(consumer, chosen, tick, tick, s.comparisons, s.descents, queue_.size());
    }
    queue_.push_back({consumer, tick, queue_.size() + 1, compute_arrivals_.size()});
    if (gas_) gas_->charge_user(consumer.id, GasKind::StorageWrite, 1);
    if (ledger_) ledger_->append(TxKind::Queued, QueuedRecord{consumer.id, tick}.encode());
    return Queued{consumer.id, tick, queue_.size()};
}

std::vector<Engagement> Matchmaker::try_drain_queue(Tick tick) {
    std::vector<Engagement> out;
    std::uint32_t tried = 0;
    for (auto it = queue_.begin(); it != queue_.end();) {
        if (compute_.empty()) break;
        if (policy_.drain_limit != 0 && tried >= policy_.drain_limit) break;
        ++tried;
        if (gas_) gas_->charge_user(it->spec.id, GasKind::StorageRead, 1);
        std::uint32_t comparisons = 0;
        if (auto chosen = recheck(*it, comparisons)) {
            out.push_back(engage(it->spec, *chosen, tick, it->enqueue_tick, comparisons, 0,
                                 it->queue_length_at_enqueue));
            it = queue_.erase(it);
        } else {
            ++it;
        }
    }
    return out;
}

std::vector<Engagement> Matchmaker::add_provider(const UserSpec& provider, Tick tick) {
    if (!is_provider(provider.role)) throw std::invalid_argument("add_provider needs a provider");
    check_member(provider);
    if (compute_.contains(provider.id) || storage_.contains(provider.id))
        throw std::invalid_argument("provider already in book");
    auto& book = provider.role == Role::ComputeProvider ? compute_ : storage_;
    const auto touched = book.insert(provider);
    if (provider.role == Role::ComputeProvider) compute_arrivals_.push_back(provider);
    if (gas_) {
        gas_->charge_user(provider.id, GasKind::TreeNodeTouch, touched);
        gas_->charge_user(provider.id, GasKind::StorageWrite, 1);
    }
    if (provider.role != Role::ComputeProvider) return {};
    return try_drain_queue(tick);
}

std::vector<Engagement> Matchmaker::admit(const UserSpec& user) {
    const Tick tick = ++clock_;
    if (user.role == Role::Consumer) {
        auto outcome = match_consumer(user, tick);
        if (auto* e = std::get_if<Engagement>(&outcome)) return {std::move(*e)};
        return {};
    }
    return add_provider(user, tick);
}

bool Matchmaker::remove_provider(UserId id) {
    for (auto* book : {&compute_, &storage_}) {
        if (auto touched = book->erase(id)) {
            if (gas_) {
                gas_->charge_user(id, GasKind::TreeNodeTouch, *touched);
                gas_->charge_user(id, GasKind::MapDelete, 1);
            }
            return true;
        }
    }
    return false;
}

bool Matchmaker::remove_consumer(UserId id) {
    for (auto it = queue_.begin(); it != queue_.end(); ++it) {
        if (it->spec.id == id) {
            queue_.erase(it);
            if (gas_) gas_->charge_user(id, GasKind::MapDelete, 1);
            return true;
        }
    }
    return false;
}

}  // namespace edgetrade
