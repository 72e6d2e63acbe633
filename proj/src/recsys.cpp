#include "coars/recsys.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "coars/rng.hpp"

namespace coars {

int Interner::intern(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    int idx = static_cast<int>(names_.size());
    names_.push_back(name);
    index_.emplace(name, idx);
    return idx;
}

std::optional<int> Interner::lookup(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void InteractionLog::add(const std::string& user, const std::string& item, std::int64_t ts) {
    events.push_back({users.intern(user), items.intern(item), ts});
}

void InteractionLog::finalize() {
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.user != b.user) return a.user < b.user;
        return a.ts < b.ts;
    });
    std::size_t before = events.size();
    // exact triple dedupe; requires a pass since ties are not fully ordered
    std::vector<Event> kept;
    kept.reserve(events.size());
    for (const Event& e : events) {
        bool dup = false;
        for (auto it = kept.rbegin(); it != kept.rend() && it->user == e.user && it->ts == e.ts; ++it) {
            if (it->item == e.item) { dup = true; break; }
        }
        if (!dup) kept.push_back(e);
    }
    events = std::move(kept);
    duplicates_dropped += before - events.size();
}

InteractionLog ingest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open interaction file: " + path);
    InteractionLog log;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto t1 = line.find('\t');
        auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw DataError("line " + std::to_string(lineno) + ": expected user<TAB>item<TAB>timestamp");
        std::string user = line.substr(0, t1);
        std::string item = line.substr(t1 + 1, t2 - t1 - 1);
        std::string ts_str = line.substr(t2 + 1);
        if (user.empty() || item.empty())
            throw DataError("line " + std::to_string(lineno) + ": empty identifier");
        std::int64_t ts = 0;
        auto [p, ec] = std::from_chars(ts_str.data(), ts_str.data() + ts_str.size(), ts);
        if (ec != std::errc{} || p != ts_str.data() + ts_str.size())
            throw DataError("line " + std::to_string(lineno) + ": bad timestamp '" + ts_str + "'");
        log.add(user, item, ts);
    }
    if (log.events.empty()) throw DataError("no events in " + path);
    log.finalize();
    return log;
}

void write_interactions_tsv(const InteractionLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (const Event& e : log.events)
        out << log.users.name(e.user) << '\t' << log.items.name(e.item) << '\t' << e.ts << '\n';
}

ChronoSplit chronological_split(const InteractionLog& log) {
    ChronoSplit split;
    split.train.users = log.users;
    split.train.items = log.items;
    std::size_t i = 0;
    while (i < log.events.size()) {
        std::size_t j = i;
        while (j < log.events.size() && log.events[j].user == log.events[i].user) ++j;
        std::size_t n = j - i;
        if (n < 2) {
            ++split.dropped_users;
        } else {
            ChronoSplit::TestCase tc;
            tc.history.user = log.users.name(log.events[i].user);
            for (std::size_t k = i; k + 1 < j; ++k) {
                split.train.events.push_back(log.events[k]);
                tc.history.events.emplace_back(log.items.name(log.events[k].item), log.events[k].ts);
            }
            tc.ground_truth = log.items.name(log.events[j - 1].item);
            split.tests.push_back(std::move(tc));
        }
        i = j;
    }
    return split;
}

std::span<const double> EmbeddingTable::user_vec(int index) const {
    return {user_vecs.data() + static_cast<std::size_t>(index) * dim, static_cast<std::size_t>(dim)};
}

std::span<const double> EmbeddingTable::item_vec(int index) const {
    return {item_vecs.data() + static_cast<std::size_t>(index) * dim, static_cast<std::size_t>(dim)};
}

void EmbeddingTable::recompute_mean_user() {
    mean_user.assign(dim, 0.0);
    int n = users.size();
    if (n == 0) return;
    for (int u = 0; u < n; ++u) {
        auto v = user_vec(u);
        for (int d = 0; d < dim; ++d) mean_user[d] += v[d];
    }
    for (double& x : mean_user) x /= n;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    double na = std::sqrt(dot(a, a));
    double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

// Fisher-Yates with our own uniform draw so shuffles are identical across
// standard library implementations.
template <typename T>
void shuffle_stable(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(canonical_unit(rng) * static_cast<double>(i));
        if (j >= i) j = i - 1;
        std::swap(v[i - 1], v[j]);
    }
}

void format_vec(std::ostream& out, std::span<const double> v) {
    char buf[64];
    for (double x : v) {
        std::snprintf(buf, sizeof buf, " %.17g", x);
        out << buf;
    }
}

}  // namespace

void EmbeddingTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "dim=" << dim << '\n';
    for (int u = 0; u < users.size(); ++u) {
        out << "u " << users.name(u);
        format_vec(out, user_vec(u));
        out << '\n';
    }
    for (int i = 0; i < items.size(); ++i) {
        out << "i " << items.name(i);
        format_vec(out, item_vec(i));
        out << '\n';
    }
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embedding file: " + path);
    EmbeddingTable t;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line) || line.rfind("dim=", 0) != 0)
        throw DataError("embedding file missing dim= header: " + path);
    t.dim = std::stoi(line.substr(4));
    if (t.dim <= 0) throw DataError("bad embedding dim in " + path);
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string kind, id;
        if (!(ss >> kind >> id) || (kind != "u" && kind != "i"))
            throw DataError("embedding line " + std::to_string(lineno + 1) + ": bad record");
        std::vector<double>& store = kind == "u" ? t.user_vecs : t.item_vecs;
        Interner& interner = kind == "u" ? t.users : t.items;
        int idx = interner.intern(id);
        if (static_cast<std::size_t>(idx) * t.dim != store.size())
            throw DataError("embedding line " + std::to_string(lineno + 1) + ": duplicate id " + id);
        for (int d = 0; d < t.dim; ++d) {
            double x = 0.0;
            if (!(ss >> x))
                throw DataError("embedding line " + std::to_string(lineno + 1) + ": expected " +
                                std::to_string(t.dim) + " values");
            store.push_back(x);
        }
        double extra;
        if (ss >> extra)
            throw DataError("embedding line " + std::to_string(lineno + 1) + ": too many values");
    }
    t.recompute_mean_user();
    return t;
}

EmbeddingTable train_embeddings(const InteractionLog& train, int dim, int epochs, double lr,
                                std::uint64_t seed, std::vector<double>* epoch_loss) {
    if (train.events.empty()) throw DataError("cannot train embeddings on an empty log");
    if (dim <= 0 || epochs < 0) throw std::invalid_argument("bad embedding hyperparameters");

    EmbeddingTable t;
    t.dim = dim;
    t.users = train.users;
    t.items = train.items;
    std::mt19937_64 rng(seed);
    auto init = [&](std::vector<double>& v, int n) {
        v.resize(static_cast<std::size_t>(n) * dim);
        for (double& x : v) x = (canonical_unit(rng) - 0.5) * 0.1;
    };
    init(t.user_vecs, t.users.size());
    init(t.item_vecs, t.items.size());

    const double reg = 1e-4;
    const int n_items = t.items.size();
    std::vector<std::size_t> order(train.events.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };

    for (int epoch = 0; epoch < epochs; ++epoch) {
        shuffle_stable(order, rng);
        double loss_sum = 0.0;
        for (std::size_t idx : order) {
            const Event& e = train.events[idx];
            int neg = e.item;
            for (int tries = 0; neg == e.item && tries < 16; ++tries)
                neg = static_cast<int>(canonical_unit(rng) * n_items) % n_items;
            double* u = t.user_vecs.data() + static_cast<std::size_t>(e.user) * dim;
            double* ip = t.item_vecs.data() + static_cast<std::size_t>(e.item) * dim;
            double* in = t.item_vecs.data() + static_cast<std::size_t>(neg) * dim;

            double x_pos = 0.0, x_neg = 0.0;
            for (int d = 0; d < dim; ++d) {
                x_pos += u[d] * ip[d];
                x_neg += u[d] * in[d];
            }
            double g_pos = sigmoid(x_pos) - 1.0;  // d loss / d x_pos
            double g_neg = sigmoid(x_neg);
            loss_sum += std::log1p(std::exp(-x_pos)) + std::log1p(std::exp(x_neg));
            for (int d = 0; d < dim; ++d) {
                double ud = u[d];
                u[d] -= lr * (g_pos * ip[d] + g_neg * in[d] + reg * ud);
                ip[d] -= lr * (g_pos * ud + reg * ip[d]);
                in[d] -= lr * (g_neg * ud + reg * in[d]);
            }
        }
        double mean_loss = loss_sum / static_cast<double>(train.events.size());
        if (!std::isfinite(mean_loss))
            throw DataError("embedding training diverged at epoch " + std::to_string(epoch));
        if (epoch_loss) epoch_loss->push_back(mean_loss);
    }
    t.recompute_mean_user();
    return t;
}

std::vector<ItemId> rank_items(const UserHistory& history, const EmbeddingTable& emb) {
    std::span<const double> uv;
    if (auto ui = emb.user_index(history.user)) {
        uv = emb.user_vec(*ui);
    } else {
        uv = {emb.mean_user.data(), emb.mean_user.size()};
    }
    std::vector<bool> seen(emb.items.size(), false);
    for (const auto& [item, ts] : history.events)
        if (auto ii = emb.item_index(item)) seen[*ii] = true;

    std::vector<std::pair<double, int>> scored;
    scored.reserve(emb.items.size());
    for (int i = 0; i < emb.items.size(); ++i) {
        if (seen[i]) continue;
        scored.emplace_back(dot(uv, emb.item_vec(i)), i);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<ItemId> out;
    out.reserve(scored.size());
    for (const auto& [s, i] : scored) out.push_back(emb.items.name(i));
    return out;
}

std::vector<ItemId> build_candidates(const UserHistory& history, const ItemId& ground_truth,
                                     const EmbeddingTable& emb, int k) {
    if (emb.items.size() < k)
        throw DataError("item universe smaller than candidate size k=" + std::to_string(k));
    std::span<const double> uv;
    if (auto ui = emb.user_index(history.user)) {
        uv = emb.user_vec(*ui);
    } else {
        uv = {emb.mean_user.data(), emb.mean_user.size()};
    }
    auto ranked = rank_items(history, emb);
    std::vector<std::pair<double, ItemId>> chosen;
    chosen.reserve(k);
    double gt_score = -std::numeric_limits<double>::infinity();
    if (auto gi = emb.item_index(ground_truth)) gt_score = dot(uv, emb.item_vec(*gi));
    for (const ItemId& item : ranked) {
        if (static_cast<int>(chosen.size()) == k - 1) break;
        if (item == ground_truth) continue;
        auto ii = emb.item_index(item);
        chosen.emplace_back(dot(uv, emb.item_vec(*ii)), item);
    }
    chosen.emplace_back(gt_score, ground_truth);
    std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<ItemId> out;
    out.reserve(chosen.size());
    for (auto& [s, item] : chosen) out.push_back(std::move(item));
    return out;
}

PeerQuery peer_similarity(const UserId& user, const ItemId& item, const EmbeddingTable& emb,
                          const InteractionLog& train_log, int max_peers, std::uint64_t seed) {
    PeerQuery out;
    auto item_idx = train_log.items.lookup(item);
    if (!item_idx) return out;
    auto self = train_log.users.lookup(user);

    std::vector<int> interactors;
    for (const Event& e : train_log.events) {
        if (e.item != *item_idx) continue;
        if (self && e.user == *self) continue;
        interactors.push_back(e.user);
    }
    std::sort(interactors.begin(), interactors.end());
    interactors.erase(std::unique(interactors.begin(), interactors.end()), interactors.end());
    if (interactors.empty()) return out;

    std::mt19937_64 rng(seed);
    shuffle_stable(interactors, rng);
    if (static_cast<int>(interactors.size()) > max_peers) interactors.resize(max_peers);

    auto ui = emb.user_index(user);
    std::vector<double> self_c(emb.dim, 0.0);
    if (ui) {
        auto uv = emb.user_vec(*ui);
        for (int d = 0; d < emb.dim; ++d) self_c[d] = uv[d] - emb.mean_user[d];
    }
    // cold users keep q = 0 (no information about them)
    bool cold = !ui;
    double acc = 0.0;
    std::vector<double> peer_c(emb.dim);
    for (int p : interactors) {
        auto pid = train_log.users.name(p);
        auto pi = emb.user_index(pid);
        if (!pi || cold) continue;
        auto pv = emb.user_vec(*pi);
        for (int d = 0; d < emb.dim; ++d) peer_c[d] = pv[d] - emb.mean_user[d];
        acc += cosine(self_c, peer_c);
    }
    if (!cold) {
        out.q = acc / static_cast<double>(interactors.size());
        out.q = std::clamp(out.q, -1.0, 1.0);
    }
    out.peer = train_log.users.name(interactors.front());
    return out;
}

PeerOpinion sample_peer_opinion(const UserId& user, const ItemId& item, const EmbeddingTable& emb,
                                const InteractionLog& train_log, std::uint64_t seed,
                                int max_peers) {
    PeerQuery pq = peer_similarity(user, item, emb, train_log, max_peers, seed);
    PeerOpinion op;
    op.item = item;
    op.similarity = pq.q;
    if (pq.peer) {
        op.peer = *pq.peer;
        op.text = "peer " + *pq.peer + " liked " + item;
    }
    return op;
}

}  // namespace coars
