#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coars/domain.hpp"
#include "coars/recsys.hpp"

namespace coars {

// Discrete vocabulary for the toy policies: one token per catalog item, four
// action tokens, ten score-bucket tokens. A recommendation is the single item
// token; a user reply is [action, bucket]. Bucket k covers [k/10, (k+1)/10)
// and decodes to its midpoint, so every bucket lies inside exactly one action
// interval (dislike 0-2, skip 3-4, star 5-7, click 8-9).
class TokenCodec {
public:
    explicit TokenCodec(std::vector<ItemId> items);

    int vocab_size() const { return n_items_ + 14; }
    int n_items() const { return n_items_; }

    int item_token(const ItemId& item) const;  // throws std::out_of_range if unknown
    int action_token(Action a) const { return n_items_ + static_cast<int>(a); }
    int bucket_token(int bucket) const;

    bool is_item(int tok) const { return tok >= 0 && tok < n_items_; }
    bool is_action(int tok) const { return tok >= n_items_ && tok < n_items_ + 4; }
    bool is_bucket(int tok) const { return tok >= n_items_ + 4 && tok < vocab_size(); }

    const ItemId& item_of(int tok) const;
    Action action_of(int tok) const;
    int bucket_of(int tok) const;

    const std::string& token_text(int tok) const { return texts_.at(tok); }
    // Inverse of token_text; throws std::out_of_range for unknown text.
    int token_from_text(const std::string& text) const;

    std::vector<int> encode_rec(const RecMessage& m) const;
    std::vector<int> encode_user(const UserMessage& m) const;
    RecMessage decode_rec(std::span<const int> tokens) const;
    UserMessage decode_user(std::span<const int> tokens) const;

    // Bucket inside `a`'s range whose midpoint is nearest to score (lower
    // bucket on ties).
    int score_bucket(Action a, double score) const;
    // Inclusive [first, last] bucket indices belonging to the action.
    static std::pair<int, int> action_buckets(Action a);
    static double bucket_midpoint(int bucket) { return (bucket + 0.5) / 10.0; }

private:
    int n_items_;
    Interner items_;
    std::vector<std::string> texts_;
};

}  // namespace coars
