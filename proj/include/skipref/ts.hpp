#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

namespace skipref
{

// A labeled transition system over value-semantic states. The transition
// relation is given as a finitely-branching successor enumerator that must
// never return an empty list (left-totality). Deterministic systems return
// exactly one successor.
template < class State, class Label = State >
struct transition_system
{
    using state_type = State;
    using label_type = Label;

    std::function< std::vector< State >( const State& ) > successors;
    std::function< Label( const State& ) > label;
    bool deterministic = true;

    [[nodiscard]] std::vector< State > next( const State& s ) const
    {
        auto succ = successors( s );
        if ( succ.empty() )
            throw std::logic_error( "transition relation is not left-total" );
        assert( !deterministic || succ.size() == 1 );
        return succ;
    }

    // The unique successor of a deterministic system.
    [[nodiscard]] State step( const State& s ) const
    {
        if ( !deterministic )
            throw std::logic_error( "step() called on a nondeterministic system" );
        auto succ = next( s );
        return std::move( succ.front() );
    }
};

// Builds a deterministic system from a step function, labeled by identity.
template < class State, class Step >
transition_system< State > deterministic_system( Step step_fn )
{
    transition_system< State > ts;
    ts.successors = [ step_fn ]( const State& s ) { return std::vector< State >{ step_fn( s ) }; };
    ts.label = []( const State& s ) { return s; };
    ts.deterministic = true;
    return ts;
}

template < class State, class Succ >
transition_system< State > nondeterministic_system( Succ succ_fn )
{
    transition_system< State > ts;
    ts.successors = std::move( succ_fn );
    ts.label = []( const State& s ) { return s; };
    ts.deterministic = false;
    return ts;
}

// A finite run prefix: states[i + 1] is a successor of states[i].
template < class State >
struct state_run
{
    std::vector< State > states;

    [[nodiscard]] std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
    [[nodiscard]] const State& front() const { return states.front(); }
    [[nodiscard]] const State& back() const { return states.back(); }

    bool operator==( const state_run& ) const = default;
};

template < class State, class Label >
state_run< State > run( const transition_system< State, Label >& system, const State& start, std::size_t n )
{
    state_run< State > r;
    r.states.reserve( n + 1 );
    r.states.push_back( start );
    for ( std::size_t i = 0; i < n; ++i )
        r.states.push_back( system.step( r.states.back() ) );
    return r;
}

template < class State, class Label >
bool is_run_of( const transition_system< State, Label >& system, const state_run< State >& r )
{
    for ( std::size_t i = 0; i + 1 < r.states.size(); ++i )
    {
        const auto succ = system.next( r.states[ i ] );
        if ( std::find( succ.begin(), succ.end(), r.states[ i + 1 ] ) == succ.end() )
            return false;
    }
    return true;
}

// Least m in [lo, hi] such that `target` is reachable from `from` in exactly m
// steps. Explores all branches level by level; each level is deduplicated on
// structural equality. States must be totally ordered.
template < class State, class Label >
std::optional< std::size_t > reachable_within( const transition_system< State, Label >& system, const State& from,
                                               const State& target, std::size_t lo, std::size_t hi )
{
    if ( lo < 1 || lo > hi )
        throw std::invalid_argument( "reachable_within requires 1 <= lo <= hi" );

    if ( system.deterministic )
    {
        State cur = from;
        for ( std::size_t m = 1; m <= hi; ++m )
        {
            cur = system.step( cur );
            if ( m >= lo && cur == target )
                return m;
        }
        return std::nullopt;
    }

    std::set< State > frontier{ from };
    for ( std::size_t m = 1; m <= hi; ++m )
    {
        std::set< State > next_level;
        for ( const auto& s : frontier )
            for ( auto& succ : system.next( s ) )
                next_level.insert( std::move( succ ) );
        if ( m >= lo && next_level.contains( target ) )
            return m;
        frontier = std::move( next_level );
    }
    return std::nullopt;
}

// Like reachable_within for deterministic systems, but also returns the
// witness path from `from` to `target` (inclusive).
template < class State, class Label >
std::optional< state_run< State > > find_path( const transition_system< State, Label >& system, const State& from,
                                               const State& target, std::size_t lo, std::size_t hi )
{
    if ( lo < 1 || lo > hi )
        throw std::invalid_argument( "find_path requires 1 <= lo <= hi" );

    if ( system.deterministic )
    {
        state_run< State > r{ { from } };
        for ( std::size_t m = 1; m <= hi; ++m )
        {
            r.states.push_back( system.step( r.states.back() ) );
            if ( m >= lo && r.states.back() == target )
                return r;
        }
        return std::nullopt;
    }

    // Level-by-level search keeping one parent per state per level.
    struct node
    {
        State state;
        std::size_t parent;
    };
    std::vector< std::vector< node > > levels{ { node{ from, 0 } } };
    for ( std::size_t m = 1; m <= hi; ++m )
    {
        std::vector< node > level;
        std::set< State > seen;
        const auto& prev = levels.back();
        for ( std::size_t i = 0; i < prev.size(); ++i )
            for ( auto& succ : system.next( prev[ i ].state ) )
                if ( seen.insert( succ ).second )
                    level.push_back( node{ std::move( succ ), i } );
        levels.push_back( std::move( level ) );

        if ( m < lo )
            continue;
        const auto& cur = levels.back();
        for ( std::size_t i = 0; i < cur.size(); ++i )
        {
            if ( !( cur[ i ].state == target ) )
                continue;
            std::vector< State > rev;
            std::size_t idx = i;
            for ( std::size_t d = m + 1; d-- > 0; )
            {
                rev.push_back( levels[ d ][ idx ].state );
                idx = levels[ d ][ idx ].parent;
            }
            return state_run< State >{ { rev.rbegin(), rev.rend() } };
        }
    }
    return std::nullopt;
}

template < class T >
struct concrete_side
{
    T state;
    auto operator<=>( const concrete_side& ) const = default;
    bool operator==( const concrete_side& ) const = default;
};

template < class T >
struct abstract_side
{
    T state;
    auto operator<=>( const abstract_side& ) const = default;
    bool operator==( const abstract_side& ) const = default;
};

template < class C, class A >
using union_state = std::variant< concrete_side< C >, abstract_side< A > >;

// The disjoint union of a concrete and an abstract system. Concrete states are
// observed through the refinement map: L(s) = L_A(r(s)).
template < class C, class A, class Label, class ConcreteLabel >
transition_system< union_state< C, A >, Label >
disjoint_union( const transition_system< A, Label >& abstract, const transition_system< C, ConcreteLabel >& concrete,
                std::function< A( const C& ) > refinement_map )
{
    using U = union_state< C, A >;
    transition_system< U, Label > ts;
    ts.deterministic = abstract.deterministic && concrete.deterministic;
    ts.successors = [ abstract, concrete ]( const U& u ) {
        std::vector< U > out;
        if ( const auto* c = std::get_if< concrete_side< C > >( &u ) )
            for ( auto& s : concrete.next( c->state ) )
                out.push_back( concrete_side< C >{ std::move( s ) } );
        else
            for ( auto& s : abstract.next( std::get< abstract_side< A > >( u ).state ) )
                out.push_back( abstract_side< A >{ std::move( s ) } );
        return out;
    };
    ts.label = [ abstract, refinement_map ]( const U& u ) {
        if ( const auto* c = std::get_if< concrete_side< C > >( &u ) )
            return abstract.label( refinement_map( c->state ) );
        return abstract.label( std::get< abstract_side< A > >( u ).state );
    };
    return ts;
}

// Refinement configuration: the map r (inducing sBw iff w = r(s)), the skip
// bound j (WFSK2d is checked as reachability in [1, j) abstract steps), and
// natural-valued ranks. `skip_bound_at` overrides `skip_bound` for systems
// whose skipping cannot be bounded by a constant; it returns the largest
// admissible step count for the transition out of s.
template < class C, class A >
struct refinement_config
{
    std::function< A( const C& ) > refinement_map;
    std::size_t skip_bound = 2;
    std::function< std::size_t( const C& ) > skip_bound_at;
    std::function< std::size_t( const C& ) > rank;
    // Right-stutter rank, rankl(v, s, u). No bundled model stutters on the right.
    std::function< std::size_t( const A&, const C&, const C& ) > right_rank;
    std::function< bool( const C& ) > good_state = []( const C& ) { return true; };

    [[nodiscard]] std::size_t max_skip_steps( const C& s ) const
    {
        if ( skip_bound_at )
            return skip_bound_at( s );
        if ( skip_bound < 2 )
            throw std::invalid_argument( "skip bound j must be at least 2" );
        return skip_bound - 1;
    }
};

} // namespace skipref
