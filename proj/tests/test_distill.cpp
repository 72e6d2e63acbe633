#include "doctest.h"

#include <cmath>
#include <set>

#include "coars/distill.hpp"
#include "support/fixtures.hpp"

using namespace coars;

namespace {

InteractionTurn turn_with(const ItemId& rec, Action a, double s) {
    InteractionTurn t;
    t.turn_index = 1;
    t.history = fixtures::history("ua", {"a"});
    t.candidates = fixtures::abc();
    t.rec.item = rec;
    t.rec.rationale = "because";
    t.user = fixtures::reply(a, s);
    return t;
}

}  // namespace

TEST_CASE("diagnose covers all four quadrants") {
    auto d = diagnose(turn_with("b", Action::click, 0.9), "b");
    CHECK(d.rec_agent == "correct");
    CHECK(d.user_agent == "correct");
    CHECK(d.outcome == "rec_correct_user_accepted");

    d = diagnose(turn_with("b", Action::skip, 0.4), "b");
    CHECK(d.rec_agent == "correct");
    CHECK(d.user_agent == "wrong");
    CHECK(d.outcome == "rec_correct_user_rejected");

    d = diagnose(turn_with("a", Action::dislike, 0.1), "b");
    CHECK(d.rec_agent == "wrong");
    CHECK(d.user_agent == "correct");
    CHECK(d.outcome == "rec_wrong_user_rejected");

    d = diagnose(turn_with("a", Action::click, 0.91), "b");
    CHECK(d.rec_agent == "wrong");
    CHECK(d.user_agent == "wrong");
    CHECK(d.outcome == "rec_wrong_user_accepted");
}

TEST_CASE("explanations are distinct per quadrant and non-empty") {
    std::set<std::string> seen;
    for (const auto& [rec, a] : std::vector<std::pair<ItemId, Action>>{
             {"b", Action::click}, {"b", Action::skip}, {"a", Action::dislike},
             {"a", Action::click}}) {
        double s = is_accept(a) ? 0.9 : 0.2;
        std::string text = explain(diagnose(turn_with(rec, a, s), "b"));
        CHECK_FALSE(text.empty());
        seen.insert(text);
    }
    CHECK(seen.size() == 4);
}

TEST_CASE("build_reference corrects both sides of a wrong-item acceptance") {
    // the case-study shape: wrong item, enthusiastically accepted
    InteractionTurn turn = turn_with("a", Action::click, 0.91);
    auto rec = fixtures::rec_in_order();  // narrowed candidates -> emits the GT
    auto user = fixtures::user_wants("b");
    std::mt19937_64 rng(1);
    DiagnosticReference ref = build_reference(turn, "b", rec, user, rng);
    CHECK(ref.original_rec.item == "a");
    CHECK(ref.original_user.action == Action::click);
    CHECK(ref.original_user.score == 0.91);
    CHECK(ref.corrected_rec.item == "b");
    // the corrected user reply answers the ORIGINAL (wrong) recommendation
    CHECK_FALSE(is_accept(ref.corrected_user.action));
    CHECK(ref.diagnosis.outcome == "rec_wrong_user_accepted");
    CHECK(ref.explanation == explain(ref.diagnosis));
}

TEST_CASE("build_reference accepts the original item when it was the target") {
    InteractionTurn turn = turn_with("b", Action::skip, 0.4);  // GT wrongly rejected
    auto rec = fixtures::rec_in_order();
    ScriptedUserPolicy user([](const Context& ctx) {
        // respects allowed_actions like a cooperative policy
        REQUIRE(ctx.allowed_actions.has_value());
        Action a = ctx.allowed_actions->front();
        return fixtures::reply(a, is_accept(a) ? 0.9 : 0.4);
    });
    std::mt19937_64 rng(1);
    DiagnosticReference ref = build_reference(turn, "b", rec, user, rng);
    CHECK(ref.corrected_rec.item == "b");
    CHECK(is_accept(ref.corrected_user.action));
    CHECK(ref.diagnosis.outcome == "rec_correct_user_rejected");
}

TEST_CASE("uncooperative policies trip protocol violations") {
    InteractionTurn turn = turn_with("a", Action::click, 0.91);
    std::mt19937_64 rng(1);
    SUBCASE("rec policy ignores the narrowed slate") {
        auto rec = fixtures::rec_always("c");
        auto user = fixtures::user_always(Action::skip, 0.4);
        CHECK_THROWS_AS(build_reference(turn, "b", rec, user, rng), ProtocolViolation);
    }
    SUBCASE("user policy answers on the wrong side") {
        auto rec = fixtures::rec_in_order();
        auto user = fixtures::user_always(Action::click, 0.9);  // must reject here
        CHECK_THROWS_AS(build_reference(turn, "b", rec, user, rng), ProtocolViolation);
    }
}

TEST_CASE("assemble_teacher_context only adds the reference") {
    Context ctx;
    ctx.role = Role::user;
    ctx.history = fixtures::history("ua", {"a", "b"});
    ctx.candidates = fixtures::abc();
    ctx.turn_index = 2;
    ctx.rec = RecMessage{"a", "try it"};
    DiagnosticReference ref;
    ref.corrected_rec.item = "b";
    Context teacher = assemble_teacher_context(ctx, ref);
    REQUIRE(teacher.reference.has_value());
    CHECK(teacher.reference->corrected_rec.item == "b");
    CHECK(teacher.role == ctx.role);
    CHECK(teacher.turn_index == ctx.turn_index);
    CHECK(teacher.history.user == ctx.history.user);
    CHECK(teacher.candidates == ctx.candidates);
    CHECK(teacher.rec->item == "a");
    CHECK_FALSE(ctx.reference.has_value());  // input untouched
}

TEST_CASE("token advantages clip the log-prob gap") {
    auto adv = token_advantages({-0.5, -4.0, -0.1}, {-1.5, -0.5, -3.0});
    REQUIRE(adv.size() == 3);
    CHECK(adv[0] == doctest::Approx(1.0));    // gap exactly +1
    CHECK(adv[1] == doctest::Approx(-1.0));   // gap -3.5, clipped
    CHECK(adv[2] == doctest::Approx(1.0));    // gap +2.9, clipped
    adv = token_advantages({-0.5}, {-0.9}, 0.25);
    CHECK(adv[0] == doctest::Approx(0.25));
    CHECK_THROWS_AS(token_advantages({-0.5}, {-0.5, -0.5}), std::invalid_argument);
}

TEST_CASE("token advantages neutralize NaN gaps") {
    double inf = std::numeric_limits<double>::infinity();
    auto adv = token_advantages({-inf}, {-inf});  // -inf - -inf = NaN
    CHECK(adv[0] == 0.0);
    adv = token_advantages({-1.0}, {-inf});  // teacher finite, student -inf: +inf gap
    CHECK(adv[0] == 1.0);
}
