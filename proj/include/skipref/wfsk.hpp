#pragma once

#include "ts.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace skipref
{

// Outcome of one (s, u, w) obligation, following the four-way case split of
// well-founded skipping plus label agreement.
enum class verdict
{
    match,          // w -> v with uBv
    stutter_left,   // uBw and rank(u) < rank(s)
    stutter_right,  // w -> v with sBv and rankl decreases
    skip,           // w ->^m v with uBv, 2 <= m <= j - 1
    label_mismatch, // L(s) != L(w)
    violation
};

inline constexpr std::string_view to_string( verdict v )
{
    switch ( v )
    {
    case verdict::match: return "MATCH";
    case verdict::stutter_left: return "STUTTER_LEFT";
    case verdict::stutter_right: return "STUTTER_RIGHT";
    case verdict::skip: return "SKIP";
    case verdict::label_mismatch: return "LABEL_MISMATCH";
    case verdict::violation: return "VIOLATION";
    }
    return "?";
}

template < class A >
struct obligation_result
{
    verdict kind = verdict::violation;
    std::size_t steps = 0;          // abstract steps taken; 1 for MATCH, m for SKIP
    state_run< A > witness;         // w ... r(u) for MATCH/SKIP, [w, v] for STUTTER_RIGHT
    std::optional< std::size_t > rank_s;
    std::optional< std::size_t > rank_u;

    [[nodiscard]] bool ok() const { return kind != verdict::violation && kind != verdict::label_mismatch; }
};

// Raised when an obligation is requested for a state outside the model's
// good-state set. Never reported as a violation.
struct not_good_state : std::domain_error
{
    using std::domain_error::domain_error;
};

template < class C, class A, class Label >
bool check_wfsk1( const C& s, const A& w, const transition_system< union_state< C, A >, Label >& union_ts )
{
    return union_ts.label( concrete_side< C >{ s } ) == union_ts.label( abstract_side< A >{ w } );
}

// Label agreement via L_A and r directly, without building the union.
template < class C, class A, class Label >
bool check_wfsk1( const C& s, const A& w, const transition_system< A, Label >& abstract,
                  const std::function< A( const C& ) >& refinement_map )
{
    return abstract.label( refinement_map( s ) ) == abstract.label( w );
}

// Decides the obligation for one concrete transition s -> u against w = r(s).
template < class C, class A, class Label >
obligation_result< A > check_transition( const C& s, const C& u, const refinement_config< C, A >& config,
                                         const transition_system< A, Label >& abstract )
{
    const A w = config.refinement_map( s );
    const A ru = config.refinement_map( u );

    obligation_result< A > res;
    if ( config.rank )
    {
        res.rank_s = config.rank( s );
        res.rank_u = config.rank( u );
    }

    if ( !check_wfsk1( s, w, abstract, config.refinement_map ) )
    {
        res.kind = verdict::label_mismatch;
        return res;
    }

    if ( config.rank && ru == w && *res.rank_u < *res.rank_s )
    {
        res.kind = verdict::stutter_left;
        return res;
    }

    const std::size_t max_steps = config.max_skip_steps( s );
    if ( max_steps >= 1 )
    {
        if ( auto path = find_path( abstract, w, ru, 1, max_steps ) )
        {
            res.steps = path->steps();
            res.kind = res.steps == 1 ? verdict::match : verdict::skip;
            res.witness = std::move( *path );
            return res;
        }
    }

    if ( config.right_rank )
    {
        const A rs = w;
        for ( const auto& v : abstract.next( w ) )
        {
            if ( v == rs && config.right_rank( v, s, u ) < config.right_rank( w, s, u ) )
            {
                res.kind = verdict::stutter_right;
                res.witness = state_run< A >{ { w, v } };
                return res;
            }
        }
    }

    res.kind = verdict::violation;
    return res;
}

// Obligation for a state of a deterministic concrete system.
template < class C, class A, class Label, class CLabel >
obligation_result< A > check_obligation( const C& s, const refinement_config< C, A >& config,
                                         const transition_system< A, Label >& abstract,
                                         const transition_system< C, CLabel >& concrete )
{
    if ( !config.good_state( s ) )
        throw not_good_state( "obligation requested for a state outside the good-state set" );
    return check_transition( s, concrete.step( s ), config, abstract );
}

// Every abstract run of exactly `depth` steps from w (fewer if branching is
// capped), used to document a failed search.
template < class A, class Label >
std::vector< state_run< A > > explore_runs( const transition_system< A, Label >& abstract, const A& w,
                                            std::size_t depth, std::size_t cap = 16 )
{
    std::vector< state_run< A > > out;
    std::vector< A > path{ w };
    std::function< void() > dfs = [ & ] {
        if ( out.size() >= cap )
            return;
        if ( path.size() == depth + 1 )
        {
            out.push_back( state_run< A >{ path } );
            return;
        }
        for ( auto& v : abstract.next( path.back() ) )
        {
            path.push_back( std::move( v ) );
            dfs();
            path.pop_back();
        }
    };
    dfs();
    return out;
}

template < class C, class A >
struct counterexample
{
    std::string model;
    C state;
    C successor;
    A abstract_image;
    std::vector< state_run< A > > explored_runs;
    std::optional< std::size_t > rank_s;
    std::optional< std::size_t > rank_u;
    std::string obligation;
};

inline std::string obligation_name( verdict v )
{
    return v == verdict::label_mismatch ? "label-agreement" : "step-matching";
}

template < class C, class A, class Label >
counterexample< C, A > make_counterexample( std::string model, const C& s, const C& u,
                                            const obligation_result< A >& res,
                                            const refinement_config< C, A >& config,
                                            const transition_system< A, Label >& abstract )
{
    const A w = config.refinement_map( s );
    return counterexample< C, A >{ std::move( model ),
                                   s,
                                   u,
                                   w,
                                   explore_runs( abstract, w, config.max_skip_steps( s ) ),
                                   res.rank_s,
                                   res.rank_u,
                                   obligation_name( res.kind ) };
}

// Re-runs the obligation recorded in a counterexample.
template < class C, class A, class Label >
obligation_result< A > replay( const counterexample< C, A >& cex, const refinement_config< C, A >& config,
                               const transition_system< A, Label >& abstract )
{
    return check_transition( cex.state, cex.successor, config, abstract );
}

template < class C, class A >
nlohmann::json to_json( const counterexample< C, A >& cex )
{
    auto runs = nlohmann::json::array();
    for ( const auto& r : cex.explored_runs )
        runs.push_back( r.states );
    auto opt = []( const std::optional< std::size_t >& v ) { return v ? nlohmann::json( *v ) : nlohmann::json(); };
    return nlohmann::json{ { "model", cex.model },
                           { "state", cex.state },
                           { "successor", cex.successor },
                           { "abstract_image", cex.abstract_image },
                           { "explored_runs", std::move( runs ) },
                           { "rank_s", opt( cex.rank_s ) },
                           { "rank_u", opt( cex.rank_u ) },
                           { "obligation", cex.obligation } };
}

struct check_report
{
    std::string model;
    std::string mode;
    std::size_t states_checked = 0;
    std::size_t non_good_states = 0;
    std::size_t obligations = 0;
    std::map< std::string, std::size_t > histogram;
    std::map< std::size_t, std::size_t > step_histogram; // abstract steps per MATCH/SKIP
    std::size_t counterexample_total = 0;
    std::size_t counterexample_cap = 10;
    std::vector< nlohmann::json > counterexamples;
    double wall_ms = 0.0;

    [[nodiscard]] bool passed() const { return counterexample_total == 0; }

    [[nodiscard]] std::size_t max_steps() const
    {
        return step_histogram.empty() ? 0 : step_histogram.rbegin()->first;
    }

    [[nodiscard]] nlohmann::json to_json() const
    {
        nlohmann::json steps = nlohmann::json::object();
        for ( const auto& [ m, n ] : step_histogram )
            steps[ std::to_string( m ) ] = n;
        return nlohmann::json{ { "model", model },
                               { "mode", mode },
                               { "states_checked", states_checked },
                               { "non_good_states", non_good_states },
                               { "obligations", obligations },
                               { "verdicts", histogram },
                               { "skip_steps", steps },
                               { "counterexample_total", counterexample_total },
                               { "counterexamples", counterexamples },
                               { "wall_ms", wall_ms } };
    }
};

// Parallelism cap: SKIPCHECK_WORKERS if set, else the hardware concurrency.
inline std::size_t worker_count()
{
    std::size_t n = std::max( 1u, std::thread::hardware_concurrency() );
    if ( const char* env = std::getenv( "SKIPCHECK_WORKERS" ) )
    {
        char* end = nullptr;
        const long v = std::strtol( env, &end, 10 );
        if ( end != env && v >= 1 )
            n = std::min< std::size_t >( n, static_cast< std::size_t >( v ) );
    }
    return n;
}

// Streams concrete states in enumeration order, checks them in parallel
// batches and merges results in order, so the report only depends on the
// input sequence.
template < class C, class A, class Label, class CLabel >
class model_checker
{
public:
    model_checker( std::string model, refinement_config< C, A > config, transition_system< A, Label > abstract,
                   transition_system< C, CLabel > concrete, std::size_t cex_cap = 10,
                   std::size_t workers = worker_count() )
        : _config{ std::move( config ) }, _abstract{ std::move( abstract ) }, _concrete{ std::move( concrete ) },
          _workers{ std::max< std::size_t >( 1, workers ) }, _start{ std::chrono::steady_clock::now() }
    {
        _report.model = std::move( model );
        _report.counterexample_cap = cex_cap;
    }

    void add( C s )
    {
        _batch.push_back( std::move( s ) );
        if ( _batch.size() >= batch_size )
            flush();
    }

    check_report finish()
    {
        flush();
        _report.wall_ms =
            std::chrono::duration< double, std::milli >( std::chrono::steady_clock::now() - _start ).count();
        return _report;
    }

    [[nodiscard]] const refinement_config< C, A >& config() const { return _config; }

private:
    static constexpr std::size_t batch_size = 4096;

    struct outcome
    {
        bool good = false;
        std::vector< C > successors;
        std::vector< obligation_result< A > > results;
    };

    outcome evaluate( const C& s ) const
    {
        outcome out;
        if ( !_config.good_state( s ) )
            return out;
        out.good = true;
        out.successors = _concrete.next( s );
        for ( const auto& u : out.successors )
            out.results.push_back( check_transition( s, u, _config, _abstract ) );
        return out;
    }

    void flush()
    {
        if ( _batch.empty() )
            return;
        std::vector< outcome > outcomes( _batch.size() );
        const std::size_t workers = std::min( _workers, _batch.size() );
        if ( workers <= 1 )
        {
            for ( std::size_t i = 0; i < _batch.size(); ++i )
                outcomes[ i ] = evaluate( _batch[ i ] );
        }
        else
        {
            std::vector< std::jthread > pool;
            const std::size_t chunk = ( _batch.size() + workers - 1 ) / workers;
            for ( std::size_t w = 0; w < workers; ++w )
            {
                pool.emplace_back( [ &, w ] {
                    const std::size_t lo = w * chunk;
                    const std::size_t hi = std::min( _batch.size(), lo + chunk );
                    for ( std::size_t i = lo; i < hi; ++i )
                        outcomes[ i ] = evaluate( _batch[ i ] );
                } );
            }
        }

        for ( std::size_t i = 0; i < _batch.size(); ++i )
        {
            auto& o = outcomes[ i ];
            if ( !o.good )
            {
                ++_report.non_good_states;
                continue;
            }
            ++_report.states_checked;
            for ( std::size_t k = 0; k < o.results.size(); ++k )
            {
                const auto& r = o.results[ k ];
                ++_report.obligations;
                ++_report.histogram[ std::string( to_string( r.kind ) ) ];
                if ( r.kind == verdict::match || r.kind == verdict::skip )
                    ++_report.step_histogram[ r.steps ];
                if ( r.ok() )
                    continue;
                ++_report.counterexample_total;
                if ( _report.counterexamples.size() < _report.counterexample_cap )
                    _report.counterexamples.push_back( to_json(
                        make_counterexample( _report.model, _batch[ i ], o.successors[ k ], r, _config, _abstract ) ) );
            }
        }
        _batch.clear();
    }

    refinement_config< C, A > _config;
    transition_system< A, Label > _abstract;
    transition_system< C, CLabel > _concrete;
    std::size_t _workers;
    std::chrono::steady_clock::time_point _start;
    std::vector< C > _batch;
    check_report _report;
};

} // namespace skipref
