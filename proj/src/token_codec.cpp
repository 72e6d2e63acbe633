#include "coars/token_codec.hpp"

#include <cmath>
#include <stdexcept>

namespace coars {

TokenCodec::TokenCodec(std::vector<ItemId> items) : n_items_(static_cast<int>(items.size())) {
    if (items.empty()) throw std::invalid_argument("token codec needs at least one item");
    texts_.reserve(items.size() + 14);
    for (auto& it : items) {
        if (items_.lookup(it)) throw std::invalid_argument("duplicate item in codec: " + it);
        items_.intern(it);
        texts_.push_back(std::move(it));
    }
    for (int a = 0; a < 4; ++a) texts_.push_back(action_name(static_cast<Action>(a)));
    for (int b = 0; b < 10; ++b) texts_.push_back("b" + std::to_string(b));
}

int TokenCodec::item_token(const ItemId& item) const {
    auto idx = items_.lookup(item);
    if (!idx) throw std::out_of_range("item not in codec: " + item);
    return *idx;
}

int TokenCodec::bucket_token(int bucket) const {
    if (bucket < 0 || bucket > 9) throw std::out_of_range("bucket out of range");
    return n_items_ + 4 + bucket;
}

const ItemId& TokenCodec::item_of(int tok) const {
    if (!is_item(tok)) throw std::out_of_range("not an item token");
    return items_.name(tok);
}

Action TokenCodec::action_of(int tok) const {
    if (!is_action(tok)) throw std::out_of_range("not an action token");
    return static_cast<Action>(tok - n_items_);
}

int TokenCodec::bucket_of(int tok) const {
    if (!is_bucket(tok)) throw std::out_of_range("not a bucket token");
    return tok - n_items_ - 4;
}

int TokenCodec::token_from_text(const std::string& text) const {
    if (auto idx = items_.lookup(text)) return *idx;
    if (auto a = action_from_name(text)) return action_token(*a);
    if (text.size() == 2 && text[0] == 'b' && text[1] >= '0' && text[1] <= '9')
        return bucket_token(text[1] - '0');
    throw std::out_of_range("unknown token text: " + text);
}

std::vector<int> TokenCodec::encode_rec(const RecMessage& m) const {
    return {item_token(m.item)};
}

std::vector<int> TokenCodec::encode_user(const UserMessage& m) const {
    return {action_token(m.action), bucket_token(score_bucket(m.action, m.score))};
}

RecMessage TokenCodec::decode_rec(std::span<const int> tokens) const {
    if (tokens.size() != 1 || !is_item(tokens[0]))
        throw std::invalid_argument("recommendation must be a single item token");
    RecMessage m;
    m.item = item_of(tokens[0]);
    return m;
}

UserMessage TokenCodec::decode_user(std::span<const int> tokens) const {
    if (tokens.size() != 2 || !is_action(tokens[0]) || !is_bucket(tokens[1]))
        throw std::invalid_argument("user reply must be [action, bucket]");
    UserMessage m;
    m.action = action_of(tokens[0]);
    int bucket = bucket_of(tokens[1]);
    auto [lo, hi] = action_buckets(m.action);
    if (bucket < lo || bucket > hi)
        throw std::invalid_argument("bucket " + std::to_string(bucket) +
                                    " outside the interval of action " + action_name(m.action));
    m.score = bucket_midpoint(bucket);
    return m;
}

std::pair<int, int> TokenCodec::action_buckets(Action a) {
    switch (a) {
        case Action::dislike: return {0, 2};
        case Action::skip: return {3, 4};
        case Action::star: return {5, 7};
        case Action::click: return {8, 9};
    }
    throw std::invalid_argument("bad action");
}

int TokenCodec::score_bucket(Action a, double score) const {
    auto [lo, hi] = action_buckets(a);
    int best = lo;
    double best_d = std::abs(score - bucket_midpoint(lo));
    for (int b = lo + 1; b <= hi; ++b) {
        double d = std::abs(score - bucket_midpoint(b));
        if (d < best_d) {
            best = b;
            best_d = d;
        }
    }
    return best;
}

}  // namespace coars
