#pragma once

// Discrete-event simulation: an abstract system that advances time one tick
// at a time and nondeterministically picks among events due now, and an
// optimized system that jumps straight to the earliest scheduled event.

#include "text.hpp"
#include "ts.hpp"
#include "wfsk.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace skipref::des
{

using sim_time = std::uint64_t;

// Ordered by time first, so the smallest element is the next event due, ties
// broken by event id.
struct scheduled
{
    sim_time time = 0;
    std::string event;

    auto operator<=>( const scheduled& ) const = default;
    bool operator==( const scheduled& ) const = default;
};

struct des_state
{
    sim_time t = 0;
    std::set< scheduled > sched;
    std::map< std::string, std::int64_t > assign;

    auto operator<=>( const des_state& ) const = default;
    bool operator==( const des_state& ) const = default;
};

struct assignment
{
    std::string var;
    std::int64_t value = 0;
};

struct spawn
{
    std::string event;
    sim_time delta = 1; // strictly positive
};

struct event_def
{
    std::string id;
    std::vector< assignment > effects;
    std::vector< spawn > spawns;
};

using event_table = std::map< std::string, event_def >;

enum class mutant
{
    none,
    keep_executed // the optimized step forgets to remove the event it ran
};

inline bool schedule_valid( const des_state& s )
{
    return s.sched.empty() || s.sched.begin()->time >= s.t;
}

// Runs `event` due at s.t: effects, then spawns, then removal from the schedule.
inline des_state execute( const des_state& s, const std::string& event, const event_table& defs,
                          bool remove = true )
{
    des_state next = s;
    if ( const auto it = defs.find( event ); it != defs.end() )
    {
        for ( const auto& a : it->second.effects )
            next.assign[ a.var ] = a.value;
        for ( const auto& sp : it->second.spawns )
            next.sched.insert( { s.t + sp.delta, sp.event } );
    }
    if ( remove )
        next.sched.erase( { s.t, event } );
    return next;
}

inline std::vector< des_state > abstract_successors( const des_state& s, const event_table& defs )
{
    std::vector< des_state > out;
    for ( auto it = s.sched.lower_bound( { s.t, {} } ); it != s.sched.end() && it->time == s.t; ++it )
        out.push_back( execute( s, it->event, defs ) );
    if ( out.empty() )
    {
        des_state next = s;
        next.t = s.t + 1;
        out.push_back( std::move( next ) );
    }
    return out;
}

struct opt_result
{
    des_state state;
    std::size_t skip_count = 1; // abstract steps this step stands for
};

inline opt_result opt_step( const des_state& s, const event_table& defs, mutant bug = mutant::none )
{
    if ( s.sched.empty() )
    {
        des_state next = s;
        next.t = s.t + 1;
        return { std::move( next ), 1 };
    }
    const scheduled first = *s.sched.begin();
    des_state at = s;
    at.t = first.time;
    return { execute( at, first.event, defs, bug != mutant::keep_executed ),
             static_cast< std::size_t >( first.time - s.t + 1 ) };
}

inline std::size_t skip_count( const des_state& s )
{
    return s.sched.empty() ? 1 : static_cast< std::size_t >( s.sched.begin()->time - s.t + 1 );
}

inline transition_system< des_state > abstract_system( const event_table& defs )
{
    return nondeterministic_system< des_state >(
        [ defs ]( const des_state& s ) { return abstract_successors( s, defs ); } );
}

inline transition_system< des_state > opt_system( const event_table& defs, mutant bug = mutant::none )
{
    return deterministic_system< des_state >(
        [ defs, bug ]( const des_state& s ) { return opt_step( s, defs, bug ).state; } );
}

// Identity refinement map; the skip bound is computed from each state.
inline refinement_config< des_state, des_state > refinement()
{
    refinement_config< des_state, des_state > rc;
    rc.refinement_map = []( const des_state& s ) { return s; };
    rc.skip_bound_at = []( const des_state& s ) { return skip_count( s ); };
    rc.good_state = []( const des_state& s ) { return schedule_valid( s ); };
    return rc;
}

struct trace_step
{
    std::size_t index = 0; // 1-based
    des_state before;
    des_state after;
    std::size_t skip_count = 0;
    std::optional< std::size_t > abstract_steps;
};

struct trace_report
{
    std::vector< trace_step > steps;
    std::optional< std::size_t > mismatch_step;

    [[nodiscard]] bool ok() const { return !mismatch_step; }
};

// Runs the optimized system n steps and, for each step with skip count m,
// looks for an abstract run of exactly m steps to the same state. Stops at the
// first mismatch.
inline trace_report match_skipping_trace( const des_state& initial, const event_table& defs, std::size_t n,
                                          mutant bug = mutant::none )
{
    const auto abstract = abstract_system( defs );
    trace_report rep;
    des_state cur = initial;
    for ( std::size_t i = 1; i <= n; ++i )
    {
        auto [ next, m ] = opt_step( cur, defs, bug );
        trace_step st{ i, cur, next, m, reachable_within( abstract, cur, next, m, m ) };
        const bool matched = st.abstract_steps.has_value();
        rep.steps.push_back( std::move( st ) );
        if ( !matched )
        {
            rep.mismatch_step = i;
            return rep;
        }
        cur = std::move( next );
    }
    return rep;
}

struct des_model
{
    event_table defs;
    des_state initial;
};

template < class Rng >
des_model random_model( Rng& rng, std::size_t max_events = 5, sim_time max_delta = 10 )
{
    std::uniform_int_distribution< std::size_t > n_events( 1, max_events );
    std::uniform_int_distribution< std::size_t > few( 0, 2 );
    std::uniform_int_distribution< sim_time > delta( 1, max_delta );
    std::uniform_int_distribution< std::int64_t > val( -10, 10 );
    std::uniform_int_distribution< int > var( 0, 2 );
    static const char* vars[] = { "x", "y", "z" };

    des_model m;
    const std::size_t n = n_events( rng );
    std::uniform_int_distribution< std::size_t > pick( 0, n - 1 );
    auto name = []( std::size_t i ) { return "e" + std::to_string( i ); };
    for ( std::size_t i = 0; i < n; ++i )
    {
        event_def def{ name( i ), {}, {} };
        for ( std::size_t k = few( rng ); k > 0; --k )
            def.effects.push_back( { vars[ var( rng ) ], val( rng ) } );
        for ( std::size_t k = few( rng ); k > 0; --k )
            def.spawns.push_back( { name( pick( rng ) ), delta( rng ) } );
        m.defs[ def.id ] = std::move( def );
    }
    for ( std::size_t k = 1 + few( rng ); k > 0; --k )
        m.initial.sched.insert( { delta( rng ) - 1, name( pick( rng ) ) } );
    return m;
}

// Text format:
//   event <id>: set <var> <int>[, <var> <int>...]; spawn <id>+<delta>[, ...]
//   at <time> <id>
inline event_def parse_event( std::string_view body, std::size_t line_no )
{
    const auto colon = body.find( ':' );
    if ( colon == std::string_view::npos )
        throw parse_error( line_no, "event definition needs ':' after the id" );
    event_def def;
    def.id = std::string( text::trim( body.substr( 0, colon ) ) );
    if ( !text::is_identifier( def.id ) )
        throw parse_error( line_no, "invalid event id '" + def.id + "'" );

    for ( auto clause : text::split( body.substr( colon + 1 ), ';' ) )
    {
        if ( clause.empty() )
            continue;
        const auto sp = clause.find_first_of( " \t" );
        const auto kw = clause.substr( 0, sp );
        if ( kw != "set" && kw != "spawn" )
            throw parse_error( line_no, "expected 'set' or 'spawn', got '" + std::string( kw ) + "'" );
        if ( sp == std::string_view::npos )
            throw parse_error( line_no, "empty '" + std::string( kw ) + "' clause" );
        for ( auto item : text::split( clause.substr( sp ), ',' ) )
        {
            if ( item.starts_with( kw ) && item.size() > kw.size() && std::isspace( item[ kw.size() ] ) )
                item = text::trim( item.substr( kw.size() ) );
            if ( kw == "set" )
            {
                const auto w = text::words( item );
                std::optional< std::int64_t > v;
                if ( w.size() == 2 )
                    v = text::to_int< std::int64_t >( w[ 1 ] );
                if ( !v || !text::is_identifier( w[ 0 ] ) )
                    throw parse_error( line_no, "expected '<var> <int>', got '" + std::string( item ) + "'" );
                def.effects.push_back( { w[ 0 ], *v } );
            }
            else
            {
                const auto plus = item.find( '+' );
                std::optional< sim_time > d;
                std::string id;
                if ( plus != std::string_view::npos )
                {
                    id = std::string( text::trim( item.substr( 0, plus ) ) );
                    d = text::to_int< sim_time >( item.substr( plus + 1 ) );
                }
                if ( !d || !text::is_identifier( id ) )
                    throw parse_error( line_no, "expected '<id>+<delta>', got '" + std::string( item ) + "'" );
                if ( *d == 0 )
                    throw parse_error( line_no, "spawn delay must be at least 1" );
                def.spawns.push_back( { id, *d } );
            }
        }
    }
    return def;
}

inline des_model parse_model( std::istream& in )
{
    des_model m;
    std::vector< std::pair< std::size_t, std::string > > referenced;
    text::for_each_line( in, [ & ]( std::size_t no, std::string_view line ) {
        const auto w = text::words( line );
        if ( w[ 0 ] == "event" )
        {
            auto def = parse_event( text::trim( line.substr( 5 ) ), no );
            for ( const auto& sp : def.spawns )
                referenced.emplace_back( no, sp.event );
            if ( m.defs.contains( def.id ) )
                throw parse_error( no, "duplicate event '" + def.id + "'" );
            m.defs[ def.id ] = std::move( def );
        }
        else if ( w[ 0 ] == "at" )
        {
            std::optional< sim_time > t;
            if ( w.size() == 3 )
                t = text::to_int< sim_time >( w[ 1 ] );
            if ( !t )
                throw parse_error( no, "expected 'at <time> <id>'" );
            m.initial.sched.insert( { *t, w[ 2 ] } );
            referenced.emplace_back( no, w[ 2 ] );
        }
        else if ( w[ 0 ] == "time" && w.size() == 2 && text::to_int< sim_time >( w[ 1 ] ) )
        {
            m.initial.t = *text::to_int< sim_time >( w[ 1 ] );
        }
        else
        {
            throw parse_error( no, "expected 'event', 'at' or 'time', got '" + w[ 0 ] + "'" );
        }
    } );
    for ( const auto& [ no, id ] : referenced )
        if ( !m.defs.contains( id ) )
            throw parse_error( no, "undefined event '" + id + "'" );
    if ( !schedule_valid( m.initial ) )
        throw parse_error( 0, "initial schedule has events before the start time" );
    return m;
}

inline void write_model( std::ostream& out, const des_model& m )
{
    if ( m.initial.t != 0 )
        out << "time " << m.initial.t << '\n';
    for ( const auto& [ id, def ] : m.defs )
    {
        out << "event " << id << ":";
        if ( !def.effects.empty() )
        {
            out << " set";
            for ( std::size_t i = 0; i < def.effects.size(); ++i )
                out << ( i ? ", " : " " ) << def.effects[ i ].var << ' ' << def.effects[ i ].value;
        }
        if ( !def.spawns.empty() )
        {
            out << ( def.effects.empty() ? " spawn" : "; spawn" );
            for ( std::size_t i = 0; i < def.spawns.size(); ++i )
                out << ( i ? ", " : " " ) << def.spawns[ i ].event << '+' << def.spawns[ i ].delta;
        }
        out << '\n';
    }
    for ( const auto& s : m.initial.sched )
        out << "at " << s.time << ' ' << s.event << '\n';
}

inline void to_json( nlohmann::json& j, const des_state& s )
{
    auto sched = nlohmann::json::array();
    for ( const auto& e : s.sched )
        sched.push_back( nlohmann::json::array( { e.event, e.time } ) );
    j = nlohmann::json{ { "t", s.t }, { "sched", std::move( sched ) }, { "assign", s.assign } };
}

} // namespace skipref::des
