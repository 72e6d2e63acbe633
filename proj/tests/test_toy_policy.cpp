#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "coars/rng.hpp"
#include "coars/toy_policy.hpp"
#include "support/fixtures.hpp"

using namespace coars;

namespace {

Context rec_ctx() {
    Context ctx;
    ctx.role = Role::rec;
    ctx.history = fixtures::history("ua", {"a", "b"});
    ctx.candidates = fixtures::abc();
    return ctx;
}

Context user_ctx(const ItemId& recommended = "b") {
    Context ctx;
    ctx.role = Role::user;
    ctx.history = fixtures::history("ua", {"a", "b"});
    ctx.candidates = fixtures::abc();
    ctx.rec = RecMessage{recommended, "why not"};
    return ctx;
}

double total_logp(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

TEST_CASE("a fresh policy is uniform over the unmasked vocabulary") {
    ToyPolicyConfig cfg;
    cfg.ref_follow_init = 0.0;  // the only nonzero init
    ToyPolicy p(Role::rec, fixtures::tiny_codec(), nullptr, cfg);
    Context ctx = rec_ctx();
    auto dist = p.full_step_distribution(ctx, 0, {});
    REQUIRE(dist.size() == 17);
    for (double pr : dist) CHECK(pr == doctest::Approx(1.0 / 17).epsilon(1e-12));
    CHECK(std::log(dist[0]) == doctest::Approx(-std::log(17.0)).epsilon(1e-12));
    // ref_follow_init only matters when a reference is present, so the
    // default-config policy is also uniform without one
    ToyPolicy q(Role::rec, fixtures::tiny_codec(), nullptr);
    auto dist2 = q.full_step_distribution(ctx, 0, {});
    for (double pr : dist2) CHECK(pr == doctest::Approx(1.0 / 17).epsilon(1e-12));
}

TEST_CASE("generate emits protocol-valid messages") {
    ToyPolicy rec(Role::rec, fixtures::tiny_codec(), nullptr);
    ToyPolicy user(Role::user, fixtures::tiny_codec(), nullptr);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        Context rctx = rec_ctx();
        auto rg = rec.generate(rctx, rng);
        REQUIRE(rg.tokens.size() == 1);
        bool in_pool = false;
        for (const auto& c : rctx.candidates)
            if (rg.rec().item == c) in_pool = true;
        CHECK(in_pool);

        Context uctx = user_ctx();
        auto ug = user.generate(uctx, rng);
        REQUIRE(ug.tokens.size() == 2);
        CHECK(validate_user_message(ug.user()).empty());
    }
}

TEST_CASE("allowed_actions restricts the user head") {
    ToyPolicy user(Role::user, fixtures::tiny_codec(), nullptr);
    std::mt19937_64 rng(9);
    Context ctx = user_ctx();
    ctx.allowed_actions = std::vector<Action>{Action::skip, Action::dislike};
    for (int i = 0; i < 100; ++i) {
        auto g = user.generate(ctx, rng);
        CHECK_FALSE(is_accept(g.user().action));
    }
    ctx.allowed_actions = std::vector<Action>{};
    CHECK_THROWS_AS(user.generate(ctx, rng), std::invalid_argument);
}

TEST_CASE("generate and logprob agree on the sampled sequence") {
    ToyPolicy rec(Role::rec, fixtures::tiny_codec(), nullptr);
    ToyPolicy user(Role::user, fixtures::tiny_codec(), nullptr);
    std::mt19937_64 rng(13);
    // push the weights off their init so probabilities are not uniform
    std::mt19937_64 wrng(3);
    for (double& w : rec.weights()) w = (canonical_unit(wrng) - 0.5);
    for (double& w : user.weights()) w = (canonical_unit(wrng) - 0.5);
    for (int i = 0; i < 50; ++i) {
        Context rctx = rec_ctx();
        auto rg = rec.generate(rctx, rng);
        auto scored = rec.logprob(rctx, rg.tokens);
        REQUIRE(scored.size() == rg.logps.size());
        for (std::size_t n = 0; n < scored.size(); ++n)
            CHECK(scored[n] == doctest::Approx(rg.logps[n]).epsilon(1e-12));

        Context uctx = user_ctx();
        auto ug = user.generate(uctx, rng);
        auto uscored = user.logprob(uctx, ug.tokens);
        for (std::size_t n = 0; n < uscored.size(); ++n)
            CHECK(uscored[n] == doctest::Approx(ug.logps[n]).epsilon(1e-12));
    }
}

TEST_CASE("logprob resolves token text when ids are absent") {
    ToyPolicy user(Role::user, fixtures::tiny_codec(), nullptr);
    Context ctx = user_ctx();
    TokenSeq with_ids;
    with_ids.ids = {user.codec().action_token(Action::star), user.codec().bucket_token(6)};
    with_ids.text = {"star", "b6"};
    TokenSeq text_only;
    text_only.text = {"star", "b6"};
    auto a = user.logprob(ctx, with_ids);
    auto b = user.logprob(ctx, text_only);
    REQUIRE(a.size() == 2);
    CHECK(a == b);
}

TEST_CASE("masked-out tokens score -inf") {
    ToyPolicy rec(Role::rec, fixtures::tiny_codec(), nullptr);
    Context ctx = rec_ctx();
    ctx.candidates = {"a", "b"};  // c exists in the vocab but not this slate
    TokenSeq outside;
    outside.ids = {rec.codec().item_token("c")};
    outside.text = {"c"};
    auto lp = rec.logprob(ctx, outside);
    REQUIRE(lp.size() == 1);
    CHECK(lp[0] == -std::numeric_limits<double>::infinity());
}

TEST_CASE("exploration keeps a floor under every supported token") {
    ToyPolicy rec(Role::rec, fixtures::tiny_codec(), nullptr);
    // drive the bias row hard toward item a
    rec.weights()[rec.codec().item_token("a")] = 50.0;
    Context ctx = rec_ctx();
    TokenSeq seq;
    seq.ids = {rec.codec().item_token("c")};
    seq.text = {"c"};
    auto lp = rec.logprob(ctx, seq);
    double floor = rec.config().explore / 3.0;  // three candidates
    CHECK(lp[0] >= std::log(floor) - 1e-12);
    CHECK(lp[0] <= std::log(floor) + 1e-9);  // softmax mass there is ~0
}

TEST_CASE("a reference pulls the policy toward the corrected tokens") {
    ToyPolicy rec(Role::rec, fixtures::tiny_codec(), nullptr);
    Context ctx = rec_ctx();
    DiagnosticReference ref;
    ref.corrected_rec.item = "b";
    ref.corrected_user = fixtures::reply(Action::skip, 0.45);
    ctx.reference = ref;
    TokenSeq seq;
    seq.ids = {rec.codec().item_token("b")};
    seq.text = {"b"};
    auto lp = rec.logprob(ctx, seq);
    // softmax(3,0,0) mixed with the exploration floor: ~0.88 on the target
    CHECK(std::exp(lp[0]) > 0.8);

    // same shape on the user side: corrected action and bucket dominate
    ToyPolicy user(Role::user, fixtures::tiny_codec(), nullptr);
    Context uctx = user_ctx();
    uctx.reference = ref;
    TokenSeq useq;
    useq.ids = {user.codec().action_token(Action::skip), user.codec().bucket_token(4)};
    useq.text = {"skip", "b4"};
    auto ulp = user.logprob(uctx, useq);
    CHECK(std::exp(ulp[0]) > 0.6);  // four actions in the mask
    CHECK(std::exp(ulp[1]) > 0.8);  // two skip buckets, 0.45 -> b4
}

TEST_CASE("accumulate_logprob_grad matches central finite differences") {
    ToyPolicy user(Role::user, fixtures::tiny_codec(), nullptr);
    std::mt19937_64 wrng(21);
    for (double& w : user.weights()) w = canonical_unit(wrng) - 0.5;
    Context ctx = user_ctx();
    ctx.peer = PeerOpinion{"ub", "b", "peer ub liked b", 0.4};
    ctx.memory.records.push_back({RecMessage{"a", ""}, fixtures::reply(Action::skip, 0.4)});

    TokenSeq seq;
    seq.ids = {user.codec().action_token(Action::star), user.codec().bucket_token(6)};
    seq.text = {"star", "b6"};
    std::vector<double> coefs{0.7, -1.3};

    std::vector<double> grad(user.weights().size(), 0.0);
    user.accumulate_logprob_grad(ctx, seq, coefs, grad);

    auto value = [&](ToyPolicy& p) {
        auto lp = p.logprob(ctx, seq);
        return coefs[0] * lp[0] + coefs[1] * lp[1];
    };
    const double h = 1e-6;
    for (std::size_t k = 0; k < user.weights().size(); ++k) {
        double orig = user.weights()[k];
        user.weights()[k] = orig + h;
        double up = value(user);
        user.weights()[k] = orig - h;
        double dn = value(user);
        user.weights()[k] = orig;
        double fd = (up - dn) / (2 * h);
        CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("accumulate_cross_entropy_grad matches finite differences") {
    ToyPolicy student(Role::user, fixtures::tiny_codec(), nullptr);
    ToyPolicy teacher(Role::user, fixtures::tiny_codec(), nullptr);
    std::mt19937_64 wrng(33);
    for (double& w : student.weights()) w = canonical_unit(wrng) - 0.5;
    for (double& w : teacher.weights()) w = canonical_unit(wrng) - 0.5;
    Context ctx = user_ctx();
    TokenSeq seq;
    seq.ids = {student.codec().action_token(Action::skip), student.codec().bucket_token(3)};
    seq.text = {"skip", "b3"};
    auto t_dists = teacher.step_distributions(ctx, seq);
    const double coef = 0.05;

    std::vector<double> grad(student.weights().size(), 0.0);
    student.accumulate_cross_entropy_grad(ctx, seq, t_dists, coef, grad);

    auto value = [&](ToyPolicy& p) {
        auto s_dists = p.step_distributions(ctx, seq);
        double acc = 0.0;
        for (std::size_t k = 0; k < s_dists.size(); ++k)
            for (std::size_t v = 0; v < s_dists[k].probs.size(); ++v)
                acc += t_dists[k].probs[v] * std::log(s_dists[k].probs[v]);
        return coef * acc;
    };
    const double h = 1e-6;
    for (std::size_t k = 0; k < student.weights().size(); ++k) {
        double orig = student.weights()[k];
        student.weights()[k] = orig + h;
        double up = value(student);
        student.weights()[k] = orig - h;
        double dn = value(student);
        student.weights()[k] = orig;
        double fd = (up - dn) / (2 * h);
        CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("step_distributions sum to one over their supports") {
    ToyPolicy user(Role::user, fixtures::tiny_codec(), nullptr);
    Context ctx = user_ctx();
    TokenSeq seq;
    seq.ids = {user.codec().action_token(Action::click), user.codec().bucket_token(8)};
    seq.text = {"click", "b8"};
    auto dists = user.step_distributions(ctx, seq);
    REQUIRE(dists.size() == 2);
    CHECK(dists[0].support.size() == 4);
    CHECK(dists[1].support.size() == 2);  // click buckets 8..9
    for (const auto& d : dists) {
        double sum = 0.0;
        for (double p : d.probs) {
            CHECK(p > 0.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("save/load round-trips weights and sampling behaviour") {
    ToyPolicy p(Role::user, fixtures::tiny_codec(), nullptr);
    std::mt19937_64 wrng(55);
    for (double& w : p.weights()) w = 3.0 * (canonical_unit(wrng) - 0.5);
    fixtures::TempFile f("toyw");
    save_toy_policy(p, f.path());
    ToyPolicy back = load_toy_policy(f.path(), nullptr);
    CHECK(back.role() == Role::user);
    CHECK(back.weights() == p.weights());
    CHECK(back.config().recency_decay == p.config().recency_decay);
    CHECK(back.config().explore == p.config().explore);
    Context ctx = user_ctx();
    TokenSeq seq;
    seq.ids = {p.codec().action_token(Action::dislike), p.codec().bucket_token(1)};
    seq.text = {"dislike", "b1"};
    CHECK(p.logprob(ctx, seq) == back.logprob(ctx, seq));
    CHECK_THROWS_AS(load_toy_policy("/nonexistent/w.txt", nullptr), DataError);
}
