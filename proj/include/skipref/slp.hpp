#pragma once

// Scalar and two-lane vector machines over a variable store, a minimal
// adjacent-pair SLP packer, and translation validation of its output by
// checking that the vector machine is a skipping refinement of the scalar one
// (skip bound 3).

#include "text.hpp"
#include "ts.hpp"
#include "wfsk.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace skipref::slp
{

using value_t = boost::multiprecision::cpp_int;
using store_t = std::map< std::string, value_t >;

enum class op
{
    add,
    sub,
    mul,
    and_,
    or_,
    nop
};

inline constexpr std::array< op, 6 > all_ops{ op::add, op::sub, op::mul, op::and_, op::or_, op::nop };

inline std::string op_name( op o )
{
    switch ( o )
    {
    case op::add: return "add";
    case op::sub: return "sub";
    case op::mul: return "mul";
    case op::and_: return "and";
    case op::or_: return "or";
    case op::nop: return "nop";
    }
    return "?";
}

inline std::optional< op > op_from_name( std::string_view name )
{
    for ( auto o : all_ops )
        if ( op_name( o ) == name )
            return o;
    return std::nullopt;
}

struct scalar_inst
{
    op code = op::nop;
    std::string z, x, y; // z := x op y

    auto operator<=>( const scalar_inst& ) const = default;
    bool operator==( const scalar_inst& ) const = default;
};

struct lane
{
    std::string dest, lhs, rhs;

    auto operator<=>( const lane& ) const = default;
    bool operator==( const lane& ) const = default;
};

// vop <c, a, b> <f, d, e>: both lanes apply the same scalar op.
struct vector_inst
{
    op code = op::nop;
    lane first, second;

    auto operator<=>( const vector_inst& ) const = default;
    bool operator==( const vector_inst& ) const = default;
};

// std::monostate stands for a malformed or absent entry (an out-of-range
// fetch); it executes as a no-op and contributes no scalar instructions.
using vinstr = std::variant< std::monostate, scalar_inst, vector_inst >;
using scalar_program = std::vector< scalar_inst >;
using vector_program = std::vector< vinstr >;

struct scalar_state
{
    scalar_program sprg;
    std::size_t pc = 0;
    store_t store;

    auto operator<=>( const scalar_state& ) const = default;
    bool operator==( const scalar_state& ) const = default;
};

struct vector_state
{
    vector_program vprg;
    std::size_t pc = 0;
    store_t store;

    auto operator<=>( const vector_state& ) const = default;
    bool operator==( const vector_state& ) const = default;
};

// Unbound variables read as 0.
inline value_t lookup( const store_t& store, const std::string& var )
{
    const auto it = store.find( var );
    return it == store.end() ? value_t( 0 ) : it->second;
}

inline value_t eval_sop( op o, const value_t& vx, const value_t& vy )
{
    switch ( o )
    {
    case op::add: return vx + vy;
    case op::sub: return vx - vy;
    case op::mul: return vx * vy;
    case op::and_: return vx & vy;
    case op::or_: return vx | vy;
    case op::nop: return vx;
    }
    return vx;
}

inline store_t exec_scalar( const scalar_inst& inst, store_t store )
{
    if ( inst.code == op::nop )
        return store;
    value_t v = eval_sop( inst.code, lookup( store, inst.x ), lookup( store, inst.y ) );
    store[ inst.z ] = std::move( v );
    return store;
}

// Both lanes read the pre-state store, then both destinations are written.
inline store_t exec_vector( const vector_inst& inst, store_t store )
{
    if ( inst.code == op::nop )
        return store;
    value_t vc = eval_sop( inst.code, lookup( store, inst.first.lhs ), lookup( store, inst.first.rhs ) );
    value_t vf = eval_sop( inst.code, lookup( store, inst.second.lhs ), lookup( store, inst.second.rhs ) );
    store[ inst.first.dest ] = std::move( vc );
    store[ inst.second.dest ] = std::move( vf );
    return store;
}

inline scalar_state spec_step( const scalar_state& s )
{
    scalar_state next{ s.sprg, s.pc + 1, s.store };
    if ( s.pc < s.sprg.size() )
        next.store = exec_scalar( s.sprg[ s.pc ], s.store );
    return next;
}

inline vinstr fetch( const vector_program& vprg, std::size_t pc )
{
    return pc < vprg.size() ? vprg[ pc ] : vinstr{};
}

inline vector_state vec_step( const vector_state& s )
{
    vector_state next{ s.vprg, s.pc + 1, s.store };
    const vinstr inst = fetch( s.vprg, s.pc );
    if ( const auto* si = std::get_if< scalar_inst >( &inst ) )
        next.store = exec_scalar( *si, s.store );
    else if ( const auto* vi = std::get_if< vector_inst >( &inst ) )
        next.store = exec_vector( *vi, s.store );
    return next;
}

inline std::size_t num_scalar_inst( const vinstr& inst )
{
    if ( std::holds_alternative< vector_inst >( inst ) )
        return 2;
    if ( std::holds_alternative< scalar_inst >( inst ) )
        return 1;
    return 0;
}

// Scalar pc corresponding to vector pc: the number of scalar instructions
// underlying vprg[0..pc]; 0 for negative pc.
inline std::size_t pcT( std::int64_t pc, const vector_program& vprg )
{
    if ( pc < 0 )
        return 0;
    std::size_t total = 0;
    const auto last = std::min< std::uint64_t >( static_cast< std::uint64_t >( pc ), vprg.size() );
    for ( std::size_t i = 0; i <= last && i < vprg.size(); ++i )
        total += num_scalar_inst( vprg[ i ] );
    return total;
}

inline scalar_program scalarize( const vinstr& inst )
{
    if ( const auto* vi = std::get_if< vector_inst >( &inst ) )
        return { scalar_inst{ vi->code, vi->first.dest, vi->first.lhs, vi->first.rhs },
                 scalar_inst{ vi->code, vi->second.dest, vi->second.lhs, vi->second.rhs } };
    if ( const auto* si = std::get_if< scalar_inst >( &inst ) )
        return { *si };
    return {};
}

inline scalar_program scalarize_vprg( const vector_program& vprg )
{
    scalar_program out;
    for ( const auto& inst : vprg )
    {
        auto part = scalarize( inst );
        out.insert( out.end(), part.begin(), part.end() );
    }
    return out;
}

struct pack_options
{
    // Turning this off yields an unsound packer; used to exercise validation.
    bool check_dependence = true;
};

// Lane 2 must not read lane 1's destination, and the lanes must write
// different variables.
inline bool packable( const scalar_inst& a, const scalar_inst& b, const pack_options& opts = {} )
{
    if ( a.code != b.code || a.code == op::nop || a.z == b.z )
        return false;
    return !opts.check_dependence || ( b.x != a.z && b.y != a.z );
}

// Single left-to-right pass packing adjacent independent same-op pairs.
inline vector_program vectorize( const scalar_program& sprg, const pack_options& opts = {} )
{
    vector_program out;
    for ( std::size_t i = 0; i < sprg.size(); )
    {
        if ( i + 1 < sprg.size() && packable( sprg[ i ], sprg[ i + 1 ], opts ) )
        {
            const auto& a = sprg[ i ];
            const auto& b = sprg[ i + 1 ];
            out.push_back( vector_inst{ a.code, { a.z, a.x, a.y }, { b.z, b.x, b.y } } );
            i += 2;
        }
        else
        {
            out.push_back( sprg[ i ] );
            i += 1;
        }
    }
    return out;
}

inline scalar_state ref_map( const vector_state& s )
{
    return { scalarize_vprg( s.vprg ), pcT( static_cast< std::int64_t >( s.pc ) - 1, s.vprg ), s.store };
}

// States past the end of the program are halted and not checked.
inline bool good_statep( const vector_state& s ) { return s.pc < s.vprg.size(); }

inline transition_system< scalar_state > spec_system()
{
    return deterministic_system< scalar_state >( []( const scalar_state& s ) { return spec_step( s ); } );
}

inline transition_system< vector_state > vec_system()
{
    return deterministic_system< vector_state >( []( const vector_state& s ) { return vec_step( s ); } );
}

// Neither machine stutters, so there is no rank; one vector step must match
// one or two scalar steps.
inline refinement_config< vector_state, scalar_state > refinement()
{
    refinement_config< vector_state, scalar_state > rc;
    rc.refinement_map = []( const vector_state& s ) { return ref_map( s ); };
    rc.skip_bound = 3;
    rc.good_state = []( const vector_state& s ) { return good_statep( s ); };
    return rc;
}

inline obligation_result< scalar_state > check_vector_step( const vector_state& s )
{
    static const auto abstract = spec_system();
    static const auto concrete = vec_system();
    static const auto config = refinement();
    return check_obligation( s, config, abstract, concrete );
}

struct validation_options
{
    // Track the abstract pc incrementally instead of recomputing pcT, and
    // require the two to agree.
    bool history_pc = false;
};

struct validation_report
{
    bool scalarization_matches = false;
    bool final_stores_match = true;
    bool final_pc_matches = true;
    std::size_t stores_checked = 0;
    std::size_t steps_checked = 0;
    std::map< std::string, std::size_t > histogram;
    // First failing obligation, if any.
    std::optional< std::size_t > failing_store;
    std::optional< std::size_t > failing_step;
    std::optional< vector_state > failing_state;
    std::string message;

    [[nodiscard]] bool ok() const
    {
        return scalarization_matches && final_stores_match && final_pc_matches && !failing_step;
    }
};

inline void run_validation( const scalar_program& src, const vector_program& vprg, const store_t& init,
                            std::size_t store_index, const validation_options& opts, validation_report& rep )
{
    vector_state s{ vprg, 0, init };
    std::size_t history = 0;
    for ( std::size_t step = 0; step < vprg.size(); ++step )
    {
        if ( opts.history_pc && history != pcT( static_cast< std::int64_t >( s.pc ) - 1, vprg ) )
            throw std::logic_error( "history pc disagrees with pcT" );

        const auto res = check_vector_step( s );
        ++rep.steps_checked;
        ++rep.histogram[ std::string( to_string( res.kind ) ) ];
        if ( !res.ok() && !rep.failing_step )
        {
            rep.failing_store = store_index;
            rep.failing_step = step;
            rep.failing_state = s;
            rep.message = "vector step " + std::to_string( step ) + " has no matching scalar run of 1 or 2 steps";
        }
        history += num_scalar_inst( vprg[ s.pc ] );
        s = vec_step( s );
    }

    const auto scalar_final = run( spec_system(), scalar_state{ src, 0, init }, src.size() ).back();
    if ( scalar_final.store != s.store )
    {
        rep.final_stores_match = false;
        if ( rep.message.empty() )
            rep.message = "final stores differ for initial store " + std::to_string( store_index );
    }
    if ( ref_map( s ).pc != src.size() )
    {
        rep.final_pc_matches = false;
        if ( rep.message.empty() )
            rep.message = "final abstract pc differs from the source length";
    }
}

// Translation validation of vprg against src over the given initial stores:
// the scalarization must reproduce src, every vector step must satisfy the
// skipping obligation, and both programs must end in the same store.
inline validation_report validate( const scalar_program& src, const vector_program& vprg,
                                   const std::vector< store_t >& stores, const validation_options& opts = {} )
{
    validation_report rep;
    rep.scalarization_matches = scalarize_vprg( vprg ) == src;
    if ( !rep.scalarization_matches )
        rep.message = "scalarized vector program differs from the source program";
    for ( std::size_t i = 0; i < stores.size(); ++i )
    {
        run_validation( src, vprg, stores[ i ], i, opts, rep );
        ++rep.stores_checked;
    }
    return rep;
}

inline std::vector< std::string > variables_of( const scalar_program& p )
{
    std::vector< std::string > vars;
    for ( const auto& i : p )
        for ( const auto* v : { &i.z, &i.x, &i.y } )
            if ( std::find( vars.begin(), vars.end(), *v ) == vars.end() )
                vars.push_back( *v );
    return vars;
}

// Zero store plus `count - 1` seeded random stores over the given variables.
inline std::vector< store_t > sample_stores( const std::vector< std::string >& vars, std::size_t count,
                                             std::uint64_t seed = 1 )
{
    std::vector< store_t > out;
    if ( count == 0 )
        return out;
    out.emplace_back();
    std::mt19937_64 rng( seed );
    std::uniform_int_distribution< std::int64_t > val( -1000, 1000 );
    for ( std::size_t i = 1; i < count; ++i )
    {
        store_t st;
        for ( const auto& v : vars )
            st[ v ] = val( rng );
        out.push_back( std::move( st ) );
    }
    return out;
}

inline std::vector< std::string > default_variables( std::size_t n )
{
    std::vector< std::string > out;
    for ( std::size_t i = 0; i < n; ++i )
        out.push_back( i < 26 ? std::string( 1, static_cast< char >( 'a' + i ) ) : "v" + std::to_string( i ) );
    return out;
}

// Adjacent instructions repeat the previous op half of the time so the packer
// has something to do.
template < class Rng >
scalar_program random_scalar_program( Rng& rng, std::size_t max_len, const std::vector< std::string >& vars )
{
    std::uniform_int_distribution< std::size_t > len_d( 0, max_len );
    std::uniform_int_distribution< std::size_t > var_d( 0, vars.size() - 1 );
    std::uniform_int_distribution< std::size_t > op_d( 0, all_ops.size() - 1 );
    std::bernoulli_distribution repeat( 0.5 );
    scalar_program p( len_d( rng ) );
    for ( std::size_t i = 0; i < p.size(); ++i )
    {
        const op o = ( i > 0 && repeat( rng ) ) ? p[ i - 1 ].code : all_ops[ op_d( rng ) ];
        p[ i ] = scalar_inst{ o, vars[ var_d( rng ) ], vars[ var_d( rng ) ], vars[ var_d( rng ) ] };
    }
    return p;
}

template < class Rng >
store_t random_store( Rng& rng, const std::vector< std::string >& vars, std::int64_t lo = -50,
                      std::int64_t hi = 50 )
{
    std::uniform_int_distribution< std::int64_t > val( lo, hi );
    std::bernoulli_distribution bound( 0.9 );
    store_t st;
    for ( const auto& v : vars )
        if ( bound( rng ) )
            st[ v ] = val( rng );
    return st;
}

// Text formats. Scalar: `add z x y`. Vector: `vadd c a b | f d e`.
inline std::string to_string( const scalar_inst& i ) { return op_name( i.code ) + " " + i.z + " " + i.x + " " + i.y; }

inline std::string to_string( const vinstr& inst )
{
    if ( const auto* si = std::get_if< scalar_inst >( &inst ) )
        return to_string( *si );
    if ( const auto* vi = std::get_if< vector_inst >( &inst ) )
        return "v" + op_name( vi->code ) + " " + vi->first.dest + " " + vi->first.lhs + " " + vi->first.rhs + " | " +
               vi->second.dest + " " + vi->second.lhs + " " + vi->second.rhs;
    return "<malformed>";
}

namespace detail
{

inline std::array< std::string, 3 > parse_regs( std::string_view part, std::size_t line_no, std::string_view line )
{
    const auto w = text::words( part );
    if ( w.size() != 3 )
        throw parse_error( line_no, "expected three variables in '" + std::string( line ) + "'" );
    for ( const auto& v : w )
        if ( !text::is_identifier( v ) )
            throw parse_error( line_no, "invalid variable name '" + v + "'" );
    return { w[ 0 ], w[ 1 ], w[ 2 ] };
}

} // namespace detail

inline scalar_inst parse_scalar_inst( std::string_view line, std::size_t line_no = 0 )
{
    const auto trimmed = text::trim( line );
    const auto sp = trimmed.find_first_of( " \t" );
    const auto name = trimmed.substr( 0, sp );
    const auto o = op_from_name( name );
    if ( !o )
        throw parse_error( line_no, "unknown scalar op '" + std::string( name ) + "'" );
    if ( sp == std::string_view::npos )
        throw parse_error( line_no, "missing operands in '" + std::string( line ) + "'" );
    const auto regs = detail::parse_regs( trimmed.substr( sp ), line_no, line );
    return { *o, regs[ 0 ], regs[ 1 ], regs[ 2 ] };
}

inline vinstr parse_vector_line( std::string_view line, std::size_t line_no = 0 )
{
    const auto trimmed = text::trim( line );
    if ( trimmed.size() > 1 && trimmed[ 0 ] == 'v' && trimmed.find( '|' ) != std::string_view::npos )
    {
        const auto sp = trimmed.find_first_of( " \t" );
        const auto name = trimmed.substr( 1, sp == std::string_view::npos ? sp : sp - 1 );
        const auto o = op_from_name( name );
        if ( !o || sp == std::string_view::npos )
            throw parse_error( line_no, "unknown vector op '" + std::string( trimmed.substr( 0, sp ) ) + "'" );
        const auto lanes = text::split( trimmed.substr( sp ), '|' );
        if ( lanes.size() != 2 )
            throw parse_error( line_no, "vector instruction needs exactly two lanes" );
        const auto l1 = detail::parse_regs( lanes[ 0 ], line_no, line );
        const auto l2 = detail::parse_regs( lanes[ 1 ], line_no, line );
        if ( l1[ 0 ] == l2[ 0 ] )
            throw parse_error( line_no, "vector lanes must write different variables" );
        return vector_inst{ *o, { l1[ 0 ], l1[ 1 ], l1[ 2 ] }, { l2[ 0 ], l2[ 1 ], l2[ 2 ] } };
    }
    return parse_scalar_inst( trimmed, line_no );
}

inline scalar_program parse_scalar_program( std::istream& in )
{
    scalar_program out;
    text::for_each_line( in, [ & ]( std::size_t no, std::string_view line ) {
        out.push_back( parse_scalar_inst( line, no ) );
    } );
    return out;
}

inline vector_program parse_vector_program( std::istream& in )
{
    vector_program out;
    text::for_each_line( in, [ & ]( std::size_t no, std::string_view line ) {
        out.push_back( parse_vector_line( line, no ) );
    } );
    return out;
}

inline void write_program( std::ostream& out, const scalar_program& p )
{
    for ( const auto& i : p )
        out << to_string( i ) << '\n';
}

inline void write_program( std::ostream& out, const vector_program& p )
{
    for ( const auto& i : p )
        out << to_string( i ) << '\n';
}

// Store literal: `a=1,b=-2`.
inline store_t parse_store( std::string_view s )
{
    store_t st;
    if ( text::trim( s ).empty() )
        return st;
    for ( auto part : text::split( s, ',' ) )
    {
        const auto eq = part.find( '=' );
        if ( eq == std::string_view::npos )
            throw std::invalid_argument( "store entries must look like name=value" );
        const auto name = std::string( text::trim( part.substr( 0, eq ) ) );
        if ( !text::is_identifier( name ) )
            throw std::invalid_argument( "invalid variable name '" + name + "'" );
        st[ name ] = value_t( std::string( text::trim( part.substr( eq + 1 ) ) ) );
    }
    return st;
}

inline nlohmann::json value_json( const value_t& v )
{
    if ( v >= std::numeric_limits< std::int64_t >::min() && v <= std::numeric_limits< std::int64_t >::max() )
        return static_cast< std::int64_t >( v );
    return v.str();
}

inline nlohmann::json store_json( const store_t& st )
{
    auto j = nlohmann::json::object();
    for ( const auto& [ k, v ] : st )
        j[ k ] = value_json( v );
    return j;
}

inline void to_json( nlohmann::json& j, const scalar_inst& i ) { j = to_string( i ); }

inline void to_json( nlohmann::json& j, const scalar_state& s )
{
    j = nlohmann::json{ { "sprg", s.sprg }, { "pc", s.pc }, { "store", store_json( s.store ) } };
}

inline void to_json( nlohmann::json& j, const vector_state& s )
{
    auto prog = nlohmann::json::array();
    for ( const auto& i : s.vprg )
        prog.push_back( to_string( i ) );
    j = nlohmann::json{ { "vprg", std::move( prog ) }, { "pc", s.pc }, { "store", store_json( s.store ) } };
}

} // namespace skipref::slp
