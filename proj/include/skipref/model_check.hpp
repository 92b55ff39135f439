#pragma once

// Drives the obligation checker over the bundled models, either over an
// exhaustively enumerated bounded domain or over seeded random samples.

#include "des.hpp"
#include "memctl.hpp"
#include "slp.hpp"
#include "stack_machine.hpp"
#include "wfsk.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace skipref
{

enum class check_mode
{
    exhaustive,
    random
};

// Raised for unusable model/domain combinations.
struct config_error : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

struct domain_spec
{
    check_mode mode = check_mode::exhaustive;
    std::size_t capacity = 2;
    std::string mutant = "none";
    std::size_t cex_cap = 10;
    std::optional< std::size_t > workers;

    // stack
    std::vector< std::int64_t > elements{ 0, 1 };
    std::size_t imem_max = 4;
    std::size_t stack_max = 3;
    std::size_t pc_overrun = 1;

    // memc
    std::vector< std::size_t > addrs{ 0, 1, 2 };
    std::vector< std::uint64_t > values{ 0, 1 };
    std::size_t mem_size = 2;
    std::size_t reqs_max = 4;

    // vec; unset bounds default to 2 instructions over 3 variables when
    // exhaustive and 12 over 6 when random
    std::optional< std::size_t > prog_max;
    std::optional< std::size_t > vars;
    std::size_t stores_per_program = 2;

    // des
    std::size_t max_events = 5;
    std::uint64_t max_delta = 10;
    std::size_t des_steps = 50;

    // random mode
    std::uint64_t seed = 1;
    std::size_t samples = 10000;
};

inline std::string to_string( check_mode m ) { return m == check_mode::exhaustive ? "exhaustive" : "random"; }

inline stack::mutant parse_stack_mutant( const std::string& name )
{
    if ( name == "none" )
        return stack::mutant::none;
    if ( name == "skip-drain-on-top" || name == "no-drain" )
        return stack::mutant::skip_drain_on_top;
    if ( name == "drop-oldest-on-full" )
        return stack::mutant::drop_oldest_on_full;
    if ( name == "rpc-off-by-one" )
        return stack::mutant::rpc_off_by_one;
    throw config_error( "unknown stack mutant '" + name + "'" );
}

inline memc::mutant parse_memc_mutant( const std::string& name )
{
    if ( name == "none" )
        return memc::mutant::none;
    if ( name == "keep-oldest-write" )
        return memc::mutant::keep_oldest_write;
    throw config_error( "unknown memc mutant '" + name + "'" );
}

inline des::mutant parse_des_mutant( const std::string& name )
{
    if ( name == "none" )
        return des::mutant::none;
    if ( name == "keep-executed" )
        return des::mutant::keep_executed;
    throw config_error( "unknown des mutant '" + name + "'" );
}

// The only vec mutant packs without the lane dependence check.
inline bool parse_vec_mutant( const std::string& name )
{
    if ( name == "none" )
        return false;
    if ( name == "no-dependence-check" )
        return true;
    throw config_error( "unknown vec mutant '" + name + "'" );
}

namespace detail
{

template < class Checker >
check_report finish( Checker& checker, const domain_spec& d )
{
    auto rep = checker.finish();
    rep.mode = to_string( d.mode );
    return rep;
}

inline std::size_t workers_for( const domain_spec& d ) { return d.workers.value_or( worker_count() ); }

inline check_report check_stack( const domain_spec& d )
{
    if ( d.capacity < 1 )
        throw config_error( "stack buffer capacity must be at least 1" );
    stack::config cfg{ d.capacity, std::nullopt, parse_stack_mutant( d.mutant ) };
    model_checker checker( "stack", stack::refinement( cfg ), stack::spec_system( cfg ), stack::impl_system( cfg ),
                           d.cex_cap, workers_for( d ) );
    if ( d.mode == check_mode::exhaustive )
    {
        if ( d.elements.empty() )
            throw config_error( "stack element domain is empty" );
        stack::domain dom{ d.elements, d.imem_max, d.stack_max, d.pc_overrun };
        stack::for_each_good_state( dom, cfg, [ & ]( const stack::istate& s ) { checker.add( s ); } );
    }
    else
    {
        std::mt19937_64 rng( d.seed );
        for ( std::size_t i = 0; i < d.samples; ++i )
            checker.add( stack::random_good_state( rng, d.imem_max, -1000, 1000, d.stack_max, cfg ) );
    }
    return finish( checker, d );
}

inline check_report check_memc( const domain_spec& d )
{
    if ( d.capacity < 1 )
        throw config_error( "request buffer capacity must be at least 1" );
    memc::config cfg{ d.capacity, false, parse_memc_mutant( d.mutant ) };
    model_checker checker( "memc", memc::refinement( cfg ), memc::spec_system(), memc::impl_system( cfg ), d.cex_cap,
                           workers_for( d ) );
    if ( d.mode == check_mode::exhaustive )
    {
        if ( d.values.empty() || d.addrs.empty() )
            throw config_error( "memc address and value domains must be non-empty" );
        memc::domain dom{ d.addrs, d.values, d.mem_size, d.reqs_max, d.pc_overrun };
        memc::for_each_good_state( dom, cfg, [ & ]( const memc::opt_mstate& s ) { checker.add( s ); } );
    }
    else
    {
        std::mt19937_64 rng( d.seed );
        for ( std::size_t i = 0; i < d.samples; ++i )
            checker.add( memc::random_good_state( rng, d.reqs_max, d.mem_size, 1000, cfg ) );
    }
    return finish( checker, d );
}

template < class Checker >
void add_run( Checker& checker, const slp::vector_program& vprg, const slp::store_t& store )
{
    slp::vector_state s{ vprg, 0, store };
    for ( std::size_t i = 0; i < vprg.size(); ++i )
    {
        checker.add( s );
        s = slp::vec_step( s );
    }
}

inline check_report check_vec( const domain_spec& d )
{
    const bool mutant = parse_vec_mutant( d.mutant );
    const bool exhaustive = d.mode == check_mode::exhaustive;
    const std::size_t prog_max = d.prog_max.value_or( exhaustive ? 2 : 12 );
    const auto vars = slp::default_variables( d.vars.value_or( exhaustive ? 3 : 6 ) );
    if ( vars.empty() )
        throw config_error( "vec needs at least one variable" );

    model_checker checker( "vec", slp::refinement(), slp::spec_system(), slp::vec_system(), d.cex_cap,
                           workers_for( d ) );
    if ( exhaustive )
    {
        std::vector< slp::scalar_inst > letters;
        for ( auto o : slp::all_ops )
            for ( const auto& z : vars )
                for ( const auto& x : vars )
                    for ( const auto& y : vars )
                        letters.push_back( { o, z, x, y } );
        const auto stores = slp::sample_stores( vars, d.stores_per_program, d.seed );
        for_each_sequence( letters, prog_max, [ & ]( const slp::scalar_program& p ) {
            const auto vprg = slp::vectorize( p, { .check_dependence = !mutant } );
            for ( const auto& st : stores )
                add_run( checker, vprg, st );
        } );
    }
    else
    {
        std::mt19937_64 rng( d.seed );
        for ( std::size_t i = 0; i < d.samples; ++i )
        {
            const auto p = slp::random_scalar_program( rng, prog_max, vars );
            add_run( checker, slp::vectorize( p, { .check_dependence = !mutant } ), slp::random_store( rng, vars ) );
        }
    }
    return finish( checker, d );
}

inline check_report check_des( const domain_spec& d )
{
    if ( d.mode == check_mode::exhaustive )
        throw config_error( "des has an unbounded state space; use --mode random" );
    if ( d.max_events < 1 || d.max_delta < 1 )
        throw config_error( "des needs at least one event and a positive maximum delay" );
    const auto bug = parse_des_mutant( d.mutant );
    std::mt19937_64 rng( d.seed );

    // Each random table gets its own systems, so fold per-table reports.
    check_report total;
    total.model = "des";
    total.counterexample_cap = d.cex_cap;
    for ( std::size_t i = 0; i < d.samples; ++i )
    {
        const auto m = des::random_model( rng, d.max_events, d.max_delta );
        model_checker checker( "des", des::refinement(), des::abstract_system( m.defs ),
                               des::opt_system( m.defs, bug ), d.cex_cap, 1 );
        des::des_state s = m.initial;
        for ( std::size_t k = 0; k < d.des_steps; ++k )
        {
            checker.add( s );
            s = des::opt_step( s, m.defs, bug ).state;
        }
        auto rep = checker.finish();
        total.states_checked += rep.states_checked;
        total.non_good_states += rep.non_good_states;
        total.obligations += rep.obligations;
        total.counterexample_total += rep.counterexample_total;
        total.wall_ms += rep.wall_ms;
        for ( const auto& [ k, v ] : rep.histogram )
            total.histogram[ k ] += v;
        for ( const auto& [ k, v ] : rep.step_histogram )
            total.step_histogram[ k ] += v;
        for ( auto& c : rep.counterexamples )
            if ( total.counterexamples.size() < d.cex_cap )
                total.counterexamples.push_back( std::move( c ) );
    }
    total.mode = to_string( d.mode );
    return total;
}

} // namespace detail

inline check_report check_model( const std::string& model, const domain_spec& d )
{
    if ( model == "stack" )
        return detail::check_stack( d );
    if ( model == "memc" )
        return detail::check_memc( d );
    if ( model == "vec" )
        return detail::check_vec( d );
    if ( model == "des" )
        return detail::check_des( d );
    throw config_error( "unknown model '" + model + "'" );
}

} // namespace skipref
