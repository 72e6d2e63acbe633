#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "coars/domain.hpp"

namespace coars {

// String id <-> dense index mapping. Indices are assigned in first-seen order
// and are stable for the lifetime of the object.
class Interner {
public:
    int intern(const std::string& name);
    std::optional<int> lookup(const std::string& name) const;
    const std::string& name(int index) const { return names_.at(index); }
    int size() const { return static_cast<int>(names_.size()); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
};

struct Event {
    int user = 0;
    int item = 0;
    std::int64_t ts = 0;
};

// Validated interaction data: events grouped by user, per-user nondecreasing
// timestamps, exact (user, item, ts) duplicates removed.
struct InteractionLog {
    Interner users;
    Interner items;
    std::vector<Event> events;
    std::size_t duplicates_dropped = 0;

    void add(const std::string& user, const std::string& item, std::int64_t ts);
    // Stable-sorts by (user, ts) and drops exact duplicate triples.
    void finalize();
};

// Reads tab-separated `user<TAB>item<TAB>timestamp` lines; `#` starts a
// comment line. Throws DataError with the offending line number.
InteractionLog ingest(const std::string& path);
void write_interactions_tsv(const InteractionLog& log, const std::string& path);

// Leave-last-out split: per user, the chronologically last event becomes the
// test ground truth and everything earlier the training history.
struct ChronoSplit {
    struct TestCase {
        UserHistory history;
        ItemId ground_truth;
    };
    InteractionLog train;  // shares the full log's id space
    std::vector<TestCase> tests;
    std::size_t dropped_users = 0;  // users with < 2 events
};

ChronoSplit chronological_split(const InteractionLog& log);

// Dense user/item embeddings from the base recommender (or imported from an
// external model via load()).
struct EmbeddingTable {
    int dim = 0;
    Interner users;
    Interner items;
    std::vector<double> user_vecs;  // users.size() * dim, row-major
    std::vector<double> item_vecs;
    std::vector<double> mean_user;  // centroid; cold-user fallback and centering

    std::span<const double> user_vec(int index) const;
    std::span<const double> item_vec(int index) const;
    std::optional<int> user_index(const UserId& u) const { return users.lookup(u); }
    std::optional<int> item_index(const ItemId& i) const { return items.lookup(i); }
    void recompute_mean_user();

    void save(const std::string& path) const;
    static EmbeddingTable load(const std::string& path);
};

// Matrix factorization on observed pairs with one uniform sampled negative
// per positive, logistic loss, plain SGD. Deterministic under seed
// (single-threaded). epoch_loss, when given, receives the per-epoch mean
// loss. Throws DataError on empty input or non-finite loss.
EmbeddingTable train_embeddings(const InteractionLog& train, int dim, int epochs, double lr,
                                std::uint64_t seed, std::vector<double>* epoch_loss = nullptr);

// All items scored by dot(user, item), descending; history items excluded;
// ties broken by interned id. Unknown users fall back to the mean user
// vector.
std::vector<ItemId> rank_items(const UserHistory& history, const EmbeddingTable& emb);

// Exactly k candidates: the ground truth plus the top-(k-1) ranked non-GT
// items, ordered by score (GT placed by its own score).
std::vector<ItemId> build_candidates(const UserHistory& history, const ItemId& ground_truth,
                                     const EmbeddingTable& emb, int k = 20);

struct PeerQuery {
    double q = 0.0;  // mean centered cosine to sampled peers, clamped to [-1,1]
    std::optional<UserId> peer;
};

// Samples up to max_peers distinct training users who interacted with item
// (excluding `user`) and averages centered user-vector cosines. No peers:
// q = 0, peer = none.
PeerQuery peer_similarity(const UserId& user, const ItemId& item, const EmbeddingTable& emb,
                          const InteractionLog& train_log, int max_peers, std::uint64_t seed);

PeerOpinion sample_peer_opinion(const UserId& user, const ItemId& item, const EmbeddingTable& emb,
                                const InteractionLog& train_log, std::uint64_t seed,
                                int max_peers = 5);

}  // namespace coars
