#pragma once

// STK (stack machine specification) and BSTK (stack machine with an
// instruction buffer that defers execution until the buffer is full or a
// `top` is fetched).

#include "enumerate.hpp"
#include "text.hpp"
#include "ts.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace skipref::stack
{

using element = std::int64_t;

enum class opcode
{
    push,
    pop,
    top,
    nop
};

struct instruction
{
    opcode op = opcode::nop;
    element operand = 0; // meaningful for push only

    static instruction push( element e ) { return { opcode::push, e }; }
    static instruction pop() { return { opcode::pop, 0 }; }
    static instruction top() { return { opcode::top, 0 }; }
    static instruction nop() { return { opcode::nop, 0 }; }

    auto operator<=>( const instruction& ) const = default;
    bool operator==( const instruction& ) const = default;
};

using program = std::vector< instruction >;
// Element 0 is the top of the stack.
using stack_type = std::vector< element >;

struct sstate
{
    program imem;
    std::size_t pc = 0;
    stack_type stk;

    auto operator<=>( const sstate& ) const = default;
    bool operator==( const sstate& ) const = default;
};

struct istate
{
    program imem;
    std::size_t pc = 0;
    stack_type stk;
    program ibuf;

    auto operator<=>( const istate& ) const = default;
    bool operator==( const istate& ) const = default;
};

// Seeded bugs used to confirm the checker can see a broken implementation.
enum class mutant
{
    none,
    skip_drain_on_top,   // top clears the buffer without executing it
    drop_oldest_on_full, // a full-buffer drain loses the oldest instruction
    rpc_off_by_one       // ref_map rolls pc back by one too few
};

struct config
{
    std::size_t capacity = 2;                  // ibuf capacity k
    std::optional< std::size_t > stack_limit;  // push on a full stack is a no-op
    mutant bug = mutant::none;
};

inline const instruction* fetch( const program& imem, std::size_t pc )
{
    return pc < imem.size() ? &imem[ pc ] : nullptr;
}

inline stack_type stk_step_inst( const instruction& inst, stack_type stk, std::optional< std::size_t > limit = {} )
{
    switch ( inst.op )
    {
    case opcode::push:
        if ( !limit || stk.size() < *limit )
            stk.insert( stk.begin(), inst.operand );
        break;
    case opcode::pop:
        if ( !stk.empty() )
            stk.erase( stk.begin() );
        break;
    case opcode::top:
    case opcode::nop:
        break;
    }
    return stk;
}

inline sstate spec_step( const sstate& s, std::optional< std::size_t > limit = {} )
{
    sstate next{ s.imem, s.pc + 1, s.stk };
    if ( const auto* inst = fetch( s.imem, s.pc ) )
        next.stk = stk_step_inst( *inst, s.stk, limit );
    return next;
}

inline bool stutterp( const instruction& inst, const program& ibuf, std::size_t capacity )
{
    return ibuf.size() < capacity && inst.op != opcode::top;
}

// Executes buffered instructions in the order they were enqueued.
inline stack_type drain( const program& ibuf, stack_type stk, std::optional< std::size_t > limit = {} )
{
    for ( const auto& inst : ibuf )
        stk = stk_step_inst( inst, std::move( stk ), limit );
    return stk;
}

inline istate impl_step( const istate& s, const config& cfg = {} )
{
    istate next{ s.imem, s.pc + 1, s.stk, {} };
    const auto* inst = fetch( s.imem, s.pc );
    if ( !inst )
    {
        next.stk = drain( s.ibuf, s.stk, cfg.stack_limit );
        return next;
    }

    if ( stutterp( *inst, s.ibuf, cfg.capacity ) )
    {
        next.ibuf = s.ibuf;
        next.ibuf.push_back( *inst );
        return next;
    }

    if ( inst->op == opcode::top )
    {
        if ( cfg.bug != mutant::skip_drain_on_top )
            next.stk = stk_step_inst( *inst, drain( s.ibuf, s.stk, cfg.stack_limit ), cfg.stack_limit );
        return next;
    }

    // Full buffer: drain, then keep only the fetched instruction.
    if ( cfg.bug == mutant::drop_oldest_on_full && !s.ibuf.empty() )
        next.stk = drain( program( s.ibuf.begin() + 1, s.ibuf.end() ), s.stk, cfg.stack_limit );
    else
        next.stk = drain( s.ibuf, s.stk, cfg.stack_limit );
    next.ibuf = { *inst };
    return next;
}

inline std::size_t rolled_back_pc( const istate& s )
{
    return s.pc >= s.ibuf.size() ? s.pc - s.ibuf.size() : 0;
}

inline istate committed_state( const istate& s )
{
    return { s.imem, rolled_back_pc( s ), s.stk, {} };
}

inline bool good_statep( const istate& s, const config& cfg = {} )
{
    if ( s.pc < s.ibuf.size() || s.ibuf.size() > cfg.capacity )
        return false;
    istate cur = committed_state( s );
    for ( std::size_t i = 0; i < s.ibuf.size(); ++i )
        cur = impl_step( cur, cfg );
    return cur == s;
}

inline sstate ref_map( const istate& s, const config& cfg = {} )
{
    std::size_t rpc = rolled_back_pc( s );
    if ( cfg.bug == mutant::rpc_off_by_one )
        rpc += 1;
    return { s.imem, rpc, s.stk };
}

inline std::size_t rank( const istate& s, const config& cfg = {} )
{
    return cfg.capacity - std::min( cfg.capacity, s.ibuf.size() );
}

inline transition_system< sstate > spec_system( const config& cfg = {} )
{
    return deterministic_system< sstate >( [ limit = cfg.stack_limit ]( const sstate& s ) {
        return spec_step( s, limit );
    } );
}

inline transition_system< istate > impl_system( const config& cfg = {} )
{
    return deterministic_system< istate >( [ cfg ]( const istate& s ) { return impl_step( s, cfg ); } );
}

// Stutter with a rank decrease, or reach ref_map(u) in fewer than k + 2 STK
// steps.
inline refinement_config< istate, sstate > refinement( const config& cfg = {} )
{
    refinement_config< istate, sstate > rc;
    rc.refinement_map = [ cfg ]( const istate& s ) { return ref_map( s, cfg ); };
    rc.skip_bound = cfg.capacity + 2;
    rc.rank = [ cfg ]( const istate& s ) { return rank( s, cfg ); };
    rc.good_state = [ cfg ]( const istate& s ) { return good_statep( s, cfg ); };
    return rc;
}

// Bounds for exhaustive enumeration.
struct domain
{
    std::vector< element > elements{ 0, 1 };
    std::size_t imem_max = 4;
    std::size_t stack_max = 3;
    // Committed pcs range over [0, |imem| + pc_overrun].
    std::size_t pc_overrun = 1;
};

inline std::vector< instruction > alphabet( const std::vector< element >& elements )
{
    std::vector< instruction > out;
    for ( auto e : elements )
        out.push_back( instruction::push( e ) );
    out.push_back( instruction::pop() );
    out.push_back( instruction::top() );
    out.push_back( instruction::nop() );
    return out;
}

// Calls fn(s) on every good state whose committed state lies in the domain,
// in a fixed order. Each good state s is generated once, from
// committed_state(s) after |ibuf(s)| steps.
template < class Fn >
void for_each_good_state( const domain& d, const config& cfg, Fn&& fn )
{
    const auto letters = alphabet( d.elements );
    std::vector< stack_type > stacks;
    for_each_sequence( d.elements, d.stack_max, [ & ]( const stack_type& st ) { stacks.push_back( st ); } );

    for_each_sequence( letters, d.imem_max, [ & ]( const program& imem ) {
        for ( const auto& stk : stacks )
            for ( std::size_t cpc = 0; cpc <= imem.size() + d.pc_overrun; ++cpc )
            {
                istate cur{ imem, cpc, stk, {} };
                for ( std::size_t n = 0; n <= cfg.capacity; ++n )
                {
                    if ( n > 0 )
                        cur = impl_step( cur, cfg );
                    if ( cur.ibuf.size() == n )
                        fn( cur );
                    else
                        break;
                }
            }
    } );
}

inline std::vector< istate > enumerate_good_states( const domain& d, const config& cfg = {} )
{
    std::vector< istate > out;
    for_each_good_state( d, cfg, [ & ]( const istate& s ) { out.push_back( s ); } );
    return out;
}

// A random good state: random program, stack and committed pc, then a random
// number of steps no larger than the buffer can absorb.
template < class Rng >
istate random_good_state( Rng& rng, std::size_t imem_max, element lo, element hi, std::size_t stack_max,
                          const config& cfg = {} )
{
    std::uniform_int_distribution< element > val( lo, hi );
    std::uniform_int_distribution< int > op( 0, 3 );
    auto rand_len = [ & ]( std::size_t max ) { return std::uniform_int_distribution< std::size_t >( 0, max )( rng ); };

    program imem( rand_len( imem_max ) );
    for ( auto& inst : imem )
        inst = { static_cast< opcode >( op( rng ) ), 0 };
    for ( auto& inst : imem )
        if ( inst.op == opcode::push )
            inst.operand = val( rng );
    stack_type stk( rand_len( stack_max ) );
    for ( auto& e : stk )
        e = val( rng );

    istate cur{ imem, rand_len( imem.size() + 1 ), stk, {} };
    const std::size_t steps = rand_len( cfg.capacity );
    for ( std::size_t n = 1; n <= steps; ++n )
    {
        istate next = impl_step( cur, cfg );
        if ( next.ibuf.size() != n )
            break;
        cur = std::move( next );
    }
    return cur;
}

// Text format: one instruction per line, `push <int>` | `pop` | `top` | `nop`.
inline instruction parse_instruction( std::string_view line, std::size_t line_no = 0 )
{
    const auto w = text::words( line );
    if ( w.size() == 2 && w[ 0 ] == "push" )
    {
        if ( auto v = text::to_int< element >( w[ 1 ] ) )
            return instruction::push( *v );
        throw parse_error( line_no, "push operand is not an integer: '" + w[ 1 ] + "'" );
    }
    if ( w.size() == 1 )
    {
        if ( w[ 0 ] == "pop" )
            return instruction::pop();
        if ( w[ 0 ] == "top" )
            return instruction::top();
        if ( w[ 0 ] == "nop" )
            return instruction::nop();
    }
    throw parse_error( line_no, "unknown stack instruction: '" + std::string( line ) + "'" );
}

inline program parse_program( std::istream& in )
{
    program out;
    text::for_each_line( in, [ & ]( std::size_t no, std::string_view line ) {
        out.push_back( parse_instruction( line, no ) );
    } );
    return out;
}

inline std::string to_string( const instruction& inst )
{
    switch ( inst.op )
    {
    case opcode::push: return "push " + std::to_string( inst.operand );
    case opcode::pop: return "pop";
    case opcode::top: return "top";
    case opcode::nop: return "nop";
    }
    return "?";
}

inline void write_program( std::ostream& out, const program& p )
{
    for ( const auto& inst : p )
        out << to_string( inst ) << '\n';
}

inline void to_json( nlohmann::json& j, const instruction& inst ) { j = to_string( inst ); }

inline void to_json( nlohmann::json& j, const sstate& s )
{
    j = nlohmann::json{ { "imem", s.imem }, { "pc", s.pc }, { "stk", s.stk } };
}

inline void to_json( nlohmann::json& j, const istate& s )
{
    j = nlohmann::json{ { "imem", s.imem }, { "pc", s.pc }, { "stk", s.stk }, { "ibuf", s.ibuf } };
}

} // namespace skipref::stack
