// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include "oracles.hpp"
#include "skipref/des.hpp"
#include "skipref/memctl.hpp"
#include "skipref/model_check.hpp"
#include "skipref/slp.hpp"
#include "skipref/stack_machine.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace skipref;

namespace
{

struct outcome
{
    bool pass = true;
    std::ostringstream detail;

    void require( bool cond, const std::string& what )
    {
        if ( !cond && pass )
            detail << "; first failure: " << what;
        pass = pass && cond;
    }
};

int failures = 0;

void criterion( int n, const char* title, const std::function< void( outcome& ) >& body )
{
    outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try
    {
        body( o );
    }
    catch ( const std::exception& e )
    {
        o.pass = false;
        o.detail << "; exception: " << e.what();
    }
    const double secs = std::chrono::duration< double >( std::chrono::steady_clock::now() - t0 ).count();
    std::printf( "%s criterion %d: %s (%.1f s%s)\n", o.pass ? "PASS" : "FAIL", n, title, secs, o.detail.str().c_str() );
    std::fflush( stdout );
    failures += !o.pass;
}

domain_spec stack_domain( std::size_t k, std::size_t imem_max )
{
    domain_spec d;
    d.capacity = k;
    d.elements = { 0, 1 };
    d.imem_max = imem_max;
    d.stack_max = 3;
    return d;
}

stack::domain stack_enum( std::size_t imem_max ) { return { { 0, 1 }, imem_max, 3, 1 }; }

} // namespace

int main()
{
    criterion( 1, "stack buffer refines the stack machine exhaustively (k=2 imem<=4, k=3 imem<=3)", []( outcome& o ) {
        for ( auto [ k, imem ] : { std::pair< std::size_t, std::size_t >{ 2, 4 }, { 3, 3 } } )
        {
            const auto t0 = std::chrono::steady_clock::now();
            const auto rep = check_model( "stack", stack_domain( k, imem ) );
            const double secs = std::chrono::duration< double >( std::chrono::steady_clock::now() - t0 ).count();
            o.detail << "; k=" << k << ": " << rep.states_checked << " states, " << rep.counterexample_total
                     << " counterexamples, max skip " << rep.max_steps();
            o.require( rep.states_checked > 0, "no states enumerated" );
            o.require( rep.passed(), "counterexample found" );
            o.require( rep.max_steps() <= k + 1, "skip longer than k+1" );
            o.require( secs < 60.0, "took longer than 60 s" );
        }
    } );

    criterion( 2, "good states are closed under the buffered step", []( outcome& o ) {
        for ( auto [ k, imem ] : { std::pair< std::size_t, std::size_t >{ 2, 4 }, { 3, 3 } } )
        {
            const stack::config cfg{ k, std::nullopt, stack::mutant::none };
            std::size_t total = 0, closed = 0;
            stack::for_each_good_state( stack_enum( imem ), cfg, [ & ]( const stack::istate& s ) {
                ++total;
                closed += stack::good_statep( stack::impl_step( s, cfg ), cfg );
            } );
            o.detail << "; k=" << k << ": " << closed << "/" << total;
            o.require( total > 0 && closed == total, "successor of a good state is not good" );
        }
    } );

    criterion( 3, "each seeded stack bug yields a counterexample (k=2)", []( outcome& o ) {
        for ( const char* m : { "skip-drain-on-top", "drop-oldest-on-full", "rpc-off-by-one" } )
        {
            auto d = stack_domain( 2, 4 );
            d.mutant = m;
            const auto rep = check_model( "stack", d );
            o.detail << "; " << m << ": " << rep.counterexample_total;
            o.require( rep.counterexample_total >= 1, std::string( m ) + " not detected" );
        }
    } );

    criterion( 4, "memory controller: refresh identity, coalescing soundness, exhaustive refinement", []( outcome& o ) {
        std::mt19937_64 rng( 2024 );
        std::uniform_int_distribution< std::size_t > len( 0, 64 );
        std::size_t refreshed = 0;
        for ( int i = 0; i < 10000; ++i )
        {
            memc::memory m( len( rng ) );
            for ( auto& v : m )
                v = rng();
            o.require( memc::mrefresh( m ) == m, "refresh changed a random memory" );
            ++refreshed;
        }
        for ( std::size_t n = 0; n <= 3; ++n )
            for ( const auto& m : memc::all_memories( { 0, 1 }, n ) )
            {
                o.require( memc::mrefresh( m ) == m, "refresh changed a small memory" );
                ++refreshed;
            }

        const memc::domain cd{ { 0, 1, 2 }, { 0, 1 }, 3, 0, 0 };
        const auto letters = memc::alphabet( cd );
        const auto mems = memc::all_memories( { 0, 1 }, 3 );
        std::size_t buffers = 0;
        for_each_sequence( letters, 3, [ & ]( const memc::requests& b ) {
            ++buffers;
            for ( const auto& m : mems )
                o.require( memc::execute_buffer( memc::mark_redundant( b ), m, true ) == memc::execute_buffer( b, m ),
                           "coalescing changed the final memory" );
        } );

        domain_spec d;
        d.capacity = 2;
        const auto rep = check_model( "memc", d );
        o.detail << "; " << refreshed << " memories refreshed, " << buffers << " buffers x " << mems.size()
                 << " memories coalesced, " << rep.states_checked << " states, " << rep.counterexample_total
                 << " counterexamples";
        o.require( rep.states_checked > 0 && rep.passed(), "memc refinement counterexample" );
    } );

    criterion( 5, "vectorizer: round trip, per-step skips of 1 or 2, equal final stores, dependent pack rejected",
               []( outcome& o ) {
                   std::mt19937_64 rng( 5 );
                   const auto vars = slp::default_variables( 6 );
                   std::size_t vector_steps = 0, scalar_steps = 0;
                   for ( int i = 0; i < 10000; ++i )
                   {
                       const auto p = slp::random_scalar_program( rng, 12, vars );
                       const auto v = slp::vectorize( p );
                       o.require( slp::scalarize_vprg( v ) == p, "round trip" );

                       const auto init = slp::random_store( rng, vars );
                       slp::vector_state s{ v, 0, init };
                       for ( std::size_t k = 0; k < v.size(); ++k )
                       {
                           const auto res = slp::check_vector_step( s );
                           const bool is_vector = std::holds_alternative< slp::vector_inst >( v[ k ] );
                           o.require( res.kind != verdict::violation, "violation" );
                           o.require( res.steps == ( is_vector ? 2u : 1u ), "wrong abstract step count" );
                           ( is_vector ? vector_steps : scalar_steps ) += 1;
                           s = slp::vec_step( s );
                       }
                       slp::scalar_state a{ p, 0, init };
                       for ( std::size_t k = 0; k < p.size(); ++k )
                           a = slp::spec_step( a );
                       o.require( a.store == s.store, "final stores differ" );
                       o.require( slp::ref_map( s ).pc == p.size(), "final abstract pc" );
                   }
                   o.detail << "; " << vector_steps << " vector steps (m=2), " << scalar_steps << " scalar steps (m=1)";

                   const slp::scalar_program dep{ { slp::op::add, "a", "b", "c" }, { slp::op::add, "d", "a", "e" } };
                   const slp::vector_program forced{
                       slp::vector_inst{ slp::op::add, { "a", "b", "c" }, { "d", "a", "e" } } };
                   const auto rep = slp::validate( dep, forced, slp::sample_stores( slp::variables_of( dep ), 16 ) );
                   o.require( !rep.ok(), "dependent pack accepted" );
                   o.detail << "; dependent pack: " << ( rep.ok() ? "accepted" : "rejected" );
               } );

    criterion( 6, "pcT of the last vector pc equals the scalarized length", []( outcome& o ) {
        std::size_t checked = 0;
        auto check = [ & ]( const slp::vector_program& v ) {
            ++checked;
            o.require( slp::pcT( static_cast< std::int64_t >( v.size() ) - 1, v ) == slp::scalarize_vprg( v ).size(),
                       "pcT mismatch" );
        };
        std::mt19937_64 rng( 6 );
        const auto vars = slp::default_variables( 6 );
        for ( int i = 0; i < 10000; ++i )
        {
            const auto p = slp::random_scalar_program( rng, 12, vars );
            check( slp::vectorize( p ) );
            check( slp::vectorize( p, { .check_dependence = false } ) );
        }
        const auto small = slp::default_variables( 2 );
        std::vector< slp::scalar_inst > letters;
        for ( auto op : slp::all_ops )
            for ( const auto& z : small )
                for ( const auto& x : small )
                    for ( const auto& y : small )
                        letters.push_back( { op, z, x, y } );
        for_each_sequence( letters, 2, [ & ]( const slp::scalar_program& p ) { check( slp::vectorize( p ) ); } );
        o.detail << "; " << checked << " programs";
    } );

    criterion( 7, "event simulator: skipping traces match with run length t_e - t + 1, including a skip >= 1000",
               []( outcome& o ) {
                   std::mt19937_64 rng( 7 );
                   std::size_t steps = 0, longest = 0;
                   for ( int i = 0; i < 100; ++i )
                   {
                       const auto m = des::random_model( rng, 5, 10 );
                       const auto rep = des::match_skipping_trace( m.initial, m.defs, 50 );
                       o.require( rep.ok(), "trace mismatch" );
                       for ( const auto& st : rep.steps )
                       {
                           const auto& s = st.before;
                           const des::sim_time due = s.sched.empty() ? s.t : s.sched.begin()->time;
                           o.require( st.abstract_steps == due - s.t + 1, "abstract run length" );
                           longest = std::max( longest, st.skip_count );
                           ++steps;
                       }
                   }
                   const des::event_table far{ { "far", { "far", { { "x", 1 } }, {} } } };
                   const auto rep = des::match_skipping_trace( { 0, { { 1500, "far" } }, {} }, far, 1 );
                   o.require( rep.ok() && rep.steps[ 0 ].abstract_steps == 1501u, "long skip" );
                   o.detail << "; " << steps << " steps, longest random skip " << longest << ", forced skip "
                            << ( rep.ok() ? rep.steps[ 0 ].skip_count : 0 );
               } );

    criterion( 8, "checker verdicts equal a brute-force unrolling oracle on the k=2 stack and memc domains",
               []( outcome& o ) {
                   std::size_t compared = 0;
                   {
                       const stack::config cfg{ 2, std::nullopt, stack::mutant::none };
                       const auto rc = stack::refinement( cfg );
                       const auto abs = stack::spec_system( cfg );
                       const auto impl = stack::impl_system( cfg );
                       stack::for_each_good_state( stack_enum( 4 ), cfg, [ & ]( const stack::istate& s ) {
                           const auto expect = oracle::unrolled_verdict< stack::istate, stack::sstate >(
                               s, [ & ]( const stack::istate& x ) { return stack::impl_step( x, cfg ); },
                               []( const stack::sstate& w ) { return stack::spec_step( w ); },
                               []( const stack::istate& x ) { return stack::ref_map( x ); },
                               [ & ]( const stack::istate& x ) { return stack::rank( x, cfg ); }, cfg.capacity + 2 );
                           o.require( oracle::summary( check_obligation( s, rc, abs, impl ) ) == expect,
                                      "stack verdict differs" );
                           ++compared;
                       } );
                   }
                   {
                       const memc::config cfg{};
                       const auto rc = memc::refinement( cfg );
                       const auto abs = memc::spec_system();
                       const auto impl = memc::impl_system( cfg );
                       memc::for_each_good_state( memc::domain{}, cfg, [ & ]( const memc::opt_mstate& s ) {
                           const auto expect = oracle::unrolled_verdict< memc::opt_mstate, memc::mstate >(
                               s, [ & ]( const memc::opt_mstate& x ) { return memc::impl_step( x, cfg ); },
                               []( const memc::mstate& w ) { return memc::spec_step( w ); },
                               []( const memc::opt_mstate& x ) { return memc::ref_map( x ); },
                               [ & ]( const memc::opt_mstate& x ) { return memc::rank( x, cfg ); }, cfg.capacity + 2 );
                           o.require( oracle::summary( check_obligation( s, rc, abs, impl ) ) == expect,
                                      "memc verdict differs" );
                           ++compared;
                       } );
                   }
                   o.detail << "; " << compared << " states compared";
               } );

    std::printf( "%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures );
    return failures ? 1 : 0;
}
