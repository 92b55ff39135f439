#include "skipref/des.hpp"
#include "skipref/model_check.hpp"
#include "skipref/slp.hpp"
#include "skipref/stack_machine.hpp"
#include "skipref/wfsk.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace skipref;
using stack::instruction;

namespace
{

const stack::config k2{ 2, std::nullopt, stack::mutant::none };

obligation_result< stack::sstate > check_stack_state( const stack::istate& s, const stack::config& cfg = k2 )
{
    return check_obligation( s, stack::refinement( cfg ), stack::spec_system( cfg ), stack::impl_system( cfg ) );
}

nlohmann::json without_wall_time( nlohmann::json j )
{
    j.erase( "wall_ms" );
    return j;
}

} // namespace

TEST( Wfsk1, GoodStackStateAgreesWithItsImage )
{
    std::mt19937_64 rng( 3 );
    const auto abs = stack::spec_system( k2 );
    const std::function< stack::sstate( const stack::istate& ) > r = []( const stack::istate& s ) {
        return stack::ref_map( s );
    };
    const auto u = disjoint_union( abs, stack::impl_system( k2 ), r );
    for ( int i = 0; i < 100; ++i )
    {
        const auto s = stack::random_good_state( rng, 6, -5, 5, 3, k2 );
        EXPECT_TRUE( check_wfsk1( s, stack::ref_map( s ), u ) );
        EXPECT_TRUE( check_wfsk1( s, stack::ref_map( s ), abs, r ) );
    }
}

TEST( Wfsk1, DifferentStackDisagrees )
{
    const stack::istate s{ { instruction::push( 1 ) }, 0, { 1 }, {} };
    auto w = stack::ref_map( s );
    w.stk = { 2 };
    const std::function< stack::sstate( const stack::istate& ) > r = []( const stack::istate& x ) {
        return stack::ref_map( x );
    };
    EXPECT_FALSE( check_wfsk1( s, w, stack::spec_system(), r ) );
}

TEST( Wfsk1, VectorStateAgreesWithItsImage )
{
    const slp::vector_state s{ slp::vectorize( { { slp::op::add, "a", "b", "c" }, { slp::op::add, "d", "e", "f" } } ),
                               0,
                               { { "b", 1 } } };
    const std::function< slp::scalar_state( const slp::vector_state& ) > r = []( const slp::vector_state& x ) {
        return slp::ref_map( x );
    };
    EXPECT_TRUE( check_wfsk1( s, slp::ref_map( s ), slp::spec_system(), r ) );
}

TEST( CheckObligation, BufferedPushStutters )
{
    const stack::istate s{ { instruction::push( 1 ), instruction::push( 2 ), instruction::top() }, 0, {}, {} };
    const auto res = check_stack_state( s );
    EXPECT_EQ( res.kind, verdict::stutter_left );
    ASSERT_TRUE( res.rank_s && res.rank_u );
    EXPECT_EQ( *res.rank_s, *res.rank_u + 1 );
}

TEST( CheckObligation, TopAfterFullBufferSkipsThreeSteps )
{
    const stack::istate s{ { instruction::push( 1 ), instruction::push( 2 ), instruction::top() },
                           2,
                           {},
                           { instruction::push( 1 ), instruction::push( 2 ) } };
    const auto res = check_stack_state( s );
    EXPECT_EQ( res.kind, verdict::skip );
    EXPECT_EQ( res.steps, 3u );
    // The witness replays through the abstract step onto r(u).
    ASSERT_EQ( res.witness.steps(), 3u );
    EXPECT_EQ( res.witness.front(), stack::ref_map( s ) );
    EXPECT_EQ( res.witness.back(), stack::ref_map( stack::impl_step( s, k2 ) ) );
    EXPECT_EQ( run( stack::spec_system(), res.witness.front(), 3 ), res.witness );
}

TEST( CheckObligation, ScalarInstructionInVectorProgramMatches )
{
    const slp::vector_state s{ { slp::scalar_inst{ slp::op::mul, "a", "b", "c" } }, 0, { { "b", 3 }, { "c", 4 } } };
    const auto res = slp::check_vector_step( s );
    EXPECT_EQ( res.kind, verdict::match );
    EXPECT_EQ( res.steps, 1u );
}

TEST( CheckObligation, NonGoodStateIsAnErrorNotAViolation )
{
    const stack::istate s{ { instruction::top() }, 1, {}, { instruction::top() } };
    EXPECT_THROW( check_stack_state( s ), not_good_state );
}

TEST( CheckObligation, ExactlyOneVerdictPerTransitionForSkipBoundTwo )
{
    // With j = 2 a three-step skip cannot be matched.
    const stack::istate s{ { instruction::push( 1 ), instruction::push( 2 ), instruction::top() },
                           2,
                           {},
                           { instruction::push( 1 ), instruction::push( 2 ) } };
    auto cfg = stack::refinement( k2 );
    cfg.skip_bound = 2;
    const auto res = check_obligation( s, cfg, stack::spec_system( k2 ), stack::impl_system( k2 ) );
    EXPECT_EQ( res.kind, verdict::violation );
}

TEST( CheckObligation, SkipBoundBelowTwoRejected )
{
    auto cfg = stack::refinement( k2 );
    cfg.skip_bound = 1;
    const stack::istate s{ { instruction::push( 1 ) }, 0, {}, {} };
    EXPECT_THROW( (void)cfg.max_skip_steps( s ), std::invalid_argument );
}

TEST( CheckObligation, NondeterministicAbstractSearchesAllBranches )
{
    // Two events at the same time: the optimized step picks the smaller id,
    // the abstract side has to find that branch.
    des::event_table defs{ { "a", { "a", { { "x", 1 } }, {} } }, { "b", { "b", { { "x", 2 } }, {} } } };
    const des::des_state s{ 3, { { 3, "a" }, { 3, "b" } }, {} };
    const auto cfg = des::refinement();
    const auto res = check_obligation( s, cfg, des::abstract_system( defs ), des::opt_system( defs ) );
    EXPECT_EQ( res.kind, verdict::match );
    EXPECT_EQ( res.witness.back().assign.at( "x" ), 1 );
}

TEST( Counterexample, ReplayReproducesViolation )
{
    const stack::config bad{ 2, std::nullopt, stack::mutant::skip_drain_on_top };
    const stack::istate s{ { instruction::push( 1 ), instruction::top() }, 1, {}, { instruction::push( 1 ) } };
    const auto cfg = stack::refinement( bad );
    const auto abs = stack::spec_system( bad );
    const auto u = stack::impl_step( s, bad );
    const auto res = check_transition( s, u, cfg, abs );
    ASSERT_EQ( res.kind, verdict::violation );
    const auto cex = make_counterexample( "stack", s, u, res, cfg, abs );
    EXPECT_EQ( replay( cex, cfg, abs ).kind, verdict::violation );
    EXPECT_EQ( cex.abstract_image, stack::ref_map( s ) );
    EXPECT_EQ( cex.obligation, "step-matching" );
    // j = 4, so the explored run has three steps.
    ASSERT_EQ( cex.explored_runs.size(), 1u );
    EXPECT_EQ( cex.explored_runs.front().steps(), 3u );
}

TEST( Counterexample, JsonFieldSetIsStable )
{
    domain_spec d;
    d.mutant = "drop-oldest-on-full";
    d.cex_cap = 3;
    const auto rep = check_model( "stack", d );
    ASSERT_FALSE( rep.passed() );
    ASSERT_EQ( rep.counterexamples.size(), 3u );
    const std::set< std::string > expected{ "model",         "state",  "successor", "abstract_image",
                                            "explored_runs", "rank_s", "rank_u",    "obligation" };
    for ( const auto& c : rep.counterexamples )
    {
        std::set< std::string > keys;
        for ( const auto& [ k, v ] : c.items() )
            keys.insert( k );
        EXPECT_EQ( keys, expected );
        EXPECT_EQ( c[ "model" ], "stack" );
    }
}

TEST( Report, CapNeverHidesTheTotal )
{
    domain_spec d;
    d.mutant = "rpc-off-by-one";
    d.cex_cap = 2;
    const auto rep = check_model( "stack", d );
    EXPECT_EQ( rep.counterexamples.size(), 2u );
    EXPECT_GT( rep.counterexample_total, 2u );
    EXPECT_EQ( rep.to_json()[ "counterexample_total" ], rep.counterexample_total );
}

TEST( Report, IndependentOfWorkerCount )
{
    for ( const char* mutant : { "none", "skip-drain-on-top" } )
    {
        domain_spec d;
        d.mutant = mutant;
        d.imem_max = 3;
        d.workers = 1;
        const auto one = check_model( "stack", d );
        d.workers = 4;
        const auto four = check_model( "stack", d );
        EXPECT_EQ( without_wall_time( one.to_json() ), without_wall_time( four.to_json() ) ) << mutant;
    }
}

TEST( Verdict, Names )
{
    EXPECT_EQ( to_string( verdict::match ), "MATCH" );
    EXPECT_EQ( to_string( verdict::stutter_left ), "STUTTER_LEFT" );
    EXPECT_EQ( to_string( verdict::stutter_right ), "STUTTER_RIGHT" );
    EXPECT_EQ( to_string( verdict::skip ), "SKIP" );
    EXPECT_EQ( to_string( verdict::label_mismatch ), "LABEL_MISMATCH" );
    EXPECT_EQ( to_string( verdict::violation ), "VIOLATION" );
}
