// Per-region matching contract.
//
// Compute providers sit in an AVL book ordered by (charge, arrival seq).
// A consumer is engaged with the first provider in that order that it can
// afford, whose capabilities cover its requirements, and whose window covers
// at least 3/4 of the consumer's window. Consumers that find nobody wait in a
// FIFO queue that is re-scanned whenever a compute provider arrives.
//
// Admissibility never changes for a fixed pair, and the book gains compute
// providers only through arrivals. A waiting consumer therefore re-tries only
// against providers that arrived since it last looked; the first admissible
// one in (charge, seq) order is exactly what a full walk would return.

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "edgetrade/domain.hpp"
#include "edgetrade/gasmeter.hpp"
#include "edgetrade/ledger.hpp"
#include "edgetrade/provider_book.hpp"

namespace edgetrade {

struct Engagement {
    UserId consumer;
    UserId compute_provider;
    std::vector<UserId> storage_providers;
    Region region;
    Money compute_charge;
    Tick matched_tick = 0;
    Tick latency_ticks = 0;
    std::uint32_t comparisons_used = 0;
    std::uint32_t descents = 0;
    std::uint32_t storage_shortfall = 0;  // replication - storage_providers.size()
    std::size_t queue_length_at_enqueue = 0;

    friend bool operator==(const Engagement&, const Engagement&) = default;
};

struct Queued {
    UserId consumer;
    Tick tick = 0;
    std::size_t queue_length = 0;  // including this consumer
};

using MatchOutcome = std::variant<Engagement, Queued>;

struct WaitingConsumer {
    UserSpec spec;
    Tick enqueue_tick = 0;
    std::size_t queue_length_at_enqueue = 0;
    std::size_t arrivals_checked = 0;  // compute arrivals already examined
};

struct MatchPolicy {
    std::uint32_t replication = 2;
    std::uint32_t drain_limit = 0;  // consumers re-tried per provider arrival, 0 = all
    std::uint32_t eng_batch = 1;    // engagements per notification message
};

// One root-to-leaf walk plus the admissibility checks on the entry it found.
struct DescentRecord {
    std::size_t book_size = 0;
    std::uint32_t comparisons = 0;
    bool storage_book = false;
};

// Upper bound on comparisons for one descent: 2*ceil(log2(n+1)) + K + 2.
std::uint32_t descent_comparison_bound(std::size_t book_size, std::size_t condition_length);

// Engaged share of a round's consumers. Throws std::invalid_argument when
// total_consumers is 0 or below the engagement count.
Rational eng_rate(std::size_t engagements, std::size_t total_consumers);

// Price, requirement implication and the 3/4 window-overlap rule.
bool compute_admissible(const UserSpec& consumer, const UserSpec& provider);
// Storage is paid at the escrow storage rate, so its charge is not compared.
bool storage_admissible(const UserSpec& consumer, const UserSpec& provider);

class Matchmaker {
public:
    Matchmaker(Region region, std::size_t condition_length, MatchPolicy policy, Ledger* ledger,
               GasMeter* gas);

    Region region() const { return region_; }

    // Compute providers trigger try_drain_queue; storage providers only join
    // the storage book. Throws std::invalid_argument on duplicates or on a
    // provider from another region.
    std::vector<Engagement> add_provider(const UserSpec& provider, Tick tick);

    MatchOutcome match_consumer(const UserSpec& consumer, Tick tick);

    std::vector<Engagement> try_drain_queue(Tick tick);

    // Advances this region's event clock by one and feeds the user in.
    std::vector<Engagement> admit(const UserSpec& user);
    Tick clock() const { return clock_; }

    bool remove_provider(UserId id);
    bool remove_consumer(UserId id);

    // Charges any partially filled notification batch.
    void flush_notifications();

    const ProviderBook& compute_book() const { return compute_; }
    const ProviderBook& storage_book() const { return storage_; }
    const std::deque<WaitingConsumer>& queue() const { return queue_; }
    std::size_t condition_length() const { return condition_length_; }

    void set_descent_observer(std::function<void(const DescentRecord&)> observer) {
        observer_ = std::move(observer);
    }

private:
    struct Search {
        const BookEntry* found = nullptr;
        std::uint32_t comparisons = 0;
        std::uint32_t descents = 0;
    };

    Search find_compute(const UserSpec& consumer, std::optional<BookKey> after = std::nullopt);
    std::optional<BookEntry> recheck(WaitingConsumer& w, std::uint32_t& comparisons);
    std::vector<UserId> pick_storage(const UserSpec& consumer, std::uint32_t& comparisons,
                                     std::uint32_t& descents);
    Engagement engage(const UserSpec& consumer, const BookEntry& provider, Tick tick, Tick enqueued,
                      std::uint32_t comparisons, std::uint32_t descents, std::size_t queue_len);
    void check_member(const UserSpec& user) const;

    Region region_;
    std::size_t condition_length_;
    MatchPolicy policy_;
    Ledger* ledger_;
    GasMeter* gas_;
    ProviderBook compute_;
    ProviderBook storage_;
    std::deque<WaitingConsumer> queue_;
    std::vector<UserSpec> compute_arrivals_;
    Tick clock_ = 0;
    std::uint32_t pending_notifications_ = 0;
    std::optional<UserId> last_engaged_;
    std::function<void(const DescentRecord&)> observer_;
};

}  // namespace edgetrade
