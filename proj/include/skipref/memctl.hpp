#pragma once

// MEMC (memory controller executing each request immediately) and OptMEMC
// (buffers writes, coalesces superseded writes, drains on read, refresh or a
// full buffer).

#include "enumerate.hpp"
#include "text.hpp"
#include "ts.hpp"

#include <nlohmann/json.hpp>

#include <cassert>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace skipref::memc
{

using value_t = std::uint64_t;
using memory = std::vector< value_t >;

enum class request_kind
{
    write,
    read,
    refresh
};

struct request
{
    request_kind kind = request_kind::refresh;
    std::size_t addr = 0;
    value_t value = 0;

    static request write( std::size_t a, value_t v ) { return { request_kind::write, a, v }; }
    static request read( std::size_t a ) { return { request_kind::read, a, 0 }; }
    static request refresh() { return { request_kind::refresh, 0, 0 }; }

    [[nodiscard]] bool is_write() const { return kind == request_kind::write; }

    auto operator<=>( const request& ) const = default;
    bool operator==( const request& ) const = default;
};

using requests = std::vector< request >;

struct mstate
{
    requests reqs;
    std::size_t pt = 0;
    memory mem;

    auto operator<=>( const mstate& ) const = default;
    bool operator==( const mstate& ) const = default;
};

struct opt_mstate
{
    requests reqs;
    std::size_t pt = 0;
    requests rbuf;
    memory mem;

    auto operator<=>( const opt_mstate& ) const = default;
    bool operator==( const opt_mstate& ) const = default;
};

enum class mutant
{
    none,
    keep_oldest_write // flags the newer of two writes to one address instead of the older
};

struct config
{
    std::size_t capacity = 2;
    // Only flag a write when the very next buffered request overwrites it.
    bool adjacent_only = false;
    mutant bug = mutant::none;
};

struct flagged_request
{
    request req;
    bool redundant = false;

    bool operator==( const flagged_request& ) const = default;
};

// Refresh reads every location and writes it straight back.
inline memory mrefresh( const memory& mem )
{
    memory out( mem.size() );
    for ( std::size_t a = 0; a < mem.size(); ++a )
    {
        const value_t v = mem[ a ];
        out[ a ] = v;
    }
    assert( out == mem );
    return out;
}

// Out-of-range writes are no-ops.
inline memory exec_request( const request& req, memory mem )
{
    switch ( req.kind )
    {
    case request_kind::write:
        if ( req.addr < mem.size() )
            mem[ req.addr ] = req.value;
        return mem;
    case request_kind::read:
        return mem;
    case request_kind::refresh:
        return mrefresh( mem );
    }
    return mem;
}

inline std::vector< flagged_request > mark_redundant( const requests& rbuf, bool adjacent_only = false,
                                                      mutant bug = mutant::none )
{
    std::vector< flagged_request > out;
    out.reserve( rbuf.size() );
    for ( const auto& r : rbuf )
        out.push_back( { r, false } );

    for ( std::size_t i = 0; i < rbuf.size(); ++i )
    {
        if ( !rbuf[ i ].is_write() )
            continue;
        const std::size_t end = adjacent_only ? std::min( rbuf.size(), i + 2 ) : rbuf.size();
        for ( std::size_t j = i + 1; j < end; ++j )
        {
            if ( rbuf[ j ].is_write() && rbuf[ j ].addr == rbuf[ i ].addr )
            {
                out[ bug == mutant::keep_oldest_write ? j : i ].redundant = true;
                break;
            }
        }
    }
    return out;
}

inline memory execute_buffer( const std::vector< flagged_request >& rbuf, memory mem, bool honor_flags )
{
    for ( const auto& f : rbuf )
        if ( !( honor_flags && f.redundant ) )
            mem = exec_request( f.req, std::move( mem ) );
    return mem;
}

inline memory execute_buffer( const requests& rbuf, memory mem )
{
    for ( const auto& r : rbuf )
        mem = exec_request( r, std::move( mem ) );
    return mem;
}

inline const request* fetch( const requests& reqs, std::size_t pt )
{
    return pt < reqs.size() ? &reqs[ pt ] : nullptr;
}

inline mstate spec_step( const mstate& s )
{
    mstate next{ s.reqs, s.pt + 1, s.mem };
    if ( const auto* req = fetch( s.reqs, s.pt ) )
        next.mem = exec_request( *req, s.mem );
    return next;
}

inline memory drain( const requests& rbuf, const memory& mem, const config& cfg )
{
    return execute_buffer( mark_redundant( rbuf, cfg.adjacent_only, cfg.bug ), mem, true );
}

inline opt_mstate impl_step( const opt_mstate& s, const config& cfg = {} )
{
    opt_mstate next{ s.reqs, s.pt + 1, {}, s.mem };
    const auto* req = fetch( s.reqs, s.pt );
    if ( !req )
    {
        next.mem = drain( s.rbuf, s.mem, cfg );
        return next;
    }
    if ( !req->is_write() )
    {
        next.mem = exec_request( *req, drain( s.rbuf, s.mem, cfg ) );
        return next;
    }
    if ( s.rbuf.size() >= cfg.capacity )
    {
        next.mem = drain( s.rbuf, s.mem, cfg );
        next.rbuf = { *req };
        return next;
    }
    next.rbuf = s.rbuf;
    next.rbuf.push_back( *req );
    return next;
}

inline std::size_t rolled_back_pt( const opt_mstate& s )
{
    return s.pt >= s.rbuf.size() ? s.pt - s.rbuf.size() : 0;
}

inline opt_mstate committed_state( const opt_mstate& s ) { return { s.reqs, rolled_back_pt( s ), {}, s.mem }; }

inline bool good_statep( const opt_mstate& s, const config& cfg = {} )
{
    if ( s.pt < s.rbuf.size() || s.rbuf.size() > cfg.capacity )
        return false;
    opt_mstate cur = committed_state( s );
    for ( std::size_t i = 0; i < s.rbuf.size(); ++i )
        cur = impl_step( cur, cfg );
    return cur == s;
}

inline mstate ref_map( const opt_mstate& s ) { return { s.reqs, rolled_back_pt( s ), s.mem }; }

inline std::size_t rank( const opt_mstate& s, const config& cfg = {} )
{
    return cfg.capacity - std::min( cfg.capacity, s.rbuf.size() );
}

inline transition_system< mstate > spec_system()
{
    return deterministic_system< mstate >( []( const mstate& s ) { return spec_step( s ); } );
}

inline transition_system< opt_mstate > impl_system( const config& cfg = {} )
{
    return deterministic_system< opt_mstate >( [ cfg ]( const opt_mstate& s ) { return impl_step( s, cfg ); } );
}

inline refinement_config< opt_mstate, mstate > refinement( const config& cfg = {} )
{
    refinement_config< opt_mstate, mstate > rc;
    rc.refinement_map = []( const opt_mstate& s ) { return ref_map( s ); };
    rc.skip_bound = cfg.capacity + 2;
    rc.rank = [ cfg ]( const opt_mstate& s ) { return rank( s, cfg ); };
    rc.good_state = [ cfg ]( const opt_mstate& s ) { return good_statep( s, cfg ); };
    return rc;
}

struct domain
{
    std::vector< std::size_t > addrs{ 0, 1, 2 };
    std::vector< value_t > values{ 0, 1 };
    std::size_t mem_size = 2;
    std::size_t reqs_max = 4;
    std::size_t pt_overrun = 1;
};

inline std::vector< request > alphabet( const domain& d )
{
    std::vector< request > out;
    for ( auto a : d.addrs )
        for ( auto v : d.values )
            out.push_back( request::write( a, v ) );
    for ( auto a : d.addrs )
        out.push_back( request::read( a ) );
    out.push_back( request::refresh() );
    return out;
}

inline std::vector< memory > all_memories( const std::vector< value_t >& values, std::size_t size )
{
    std::vector< memory > out;
    for_each_sequence( values, size, [ & ]( const memory& m ) {
        if ( m.size() == size )
            out.push_back( m );
    } );
    return out;
}

template < class Fn >
void for_each_good_state( const domain& d, const config& cfg, Fn&& fn )
{
    const auto letters = alphabet( d );
    const auto mems = all_memories( d.values, d.mem_size );
    for_each_sequence( letters, d.reqs_max, [ & ]( const requests& reqs ) {
        for ( const auto& mem : mems )
            for ( std::size_t cpt = 0; cpt <= reqs.size() + d.pt_overrun; ++cpt )
            {
                opt_mstate cur{ reqs, cpt, {}, mem };
                for ( std::size_t n = 0; n <= cfg.capacity; ++n )
                {
                    if ( n > 0 )
                        cur = impl_step( cur, cfg );
                    if ( cur.rbuf.size() != n )
                        break;
                    fn( cur );
                }
            }
    } );
}

inline std::vector< opt_mstate > enumerate_good_states( const domain& d, const config& cfg = {} )
{
    std::vector< opt_mstate > out;
    for_each_good_state( d, cfg, [ & ]( const opt_mstate& s ) { out.push_back( s ); } );
    return out;
}

template < class Rng >
request random_request( Rng& rng, std::size_t addr_max, value_t value_max )
{
    std::uniform_int_distribution< int > kind( 0, 5 );
    std::uniform_int_distribution< std::size_t > addr( 0, addr_max );
    std::uniform_int_distribution< value_t > val( 0, value_max );
    switch ( kind( rng ) )
    {
    case 0: return request::read( addr( rng ) );
    case 1: return request::refresh();
    default: return request::write( addr( rng ), val( rng ) );
    }
}

template < class Rng >
opt_mstate random_good_state( Rng& rng, std::size_t reqs_max, std::size_t mem_size, value_t value_max,
                              const config& cfg = {} )
{
    auto rand_len = [ & ]( std::size_t max ) { return std::uniform_int_distribution< std::size_t >( 0, max )( rng ); };
    std::uniform_int_distribution< value_t > val( 0, value_max );
    requests reqs( rand_len( reqs_max ) );
    for ( auto& r : reqs )
        r = random_request( rng, mem_size, value_max );
    memory mem( mem_size );
    for ( auto& v : mem )
        v = val( rng );
    opt_mstate cur{ reqs, rand_len( reqs.size() + 1 ), {}, mem };
    const std::size_t steps = rand_len( cfg.capacity );
    for ( std::size_t n = 1; n <= steps; ++n )
    {
        opt_mstate next = impl_step( cur, cfg );
        if ( next.rbuf.size() != n )
            break;
        cur = std::move( next );
    }
    return cur;
}

// Text format: `write <addr> <val>` | `read <addr>` | `refresh`, one per line.
inline request parse_request( std::string_view line, std::size_t line_no = 0 )
{
    const auto w = text::words( line );
    auto nat = [ & ]( const std::string& tok ) {
        if ( auto v = text::to_int< std::uint64_t >( tok ) )
            return *v;
        throw parse_error( line_no, "expected a natural number, got '" + tok + "'" );
    };
    if ( w.size() == 3 && w[ 0 ] == "write" )
        return request::write( nat( w[ 1 ] ), nat( w[ 2 ] ) );
    if ( w.size() == 2 && w[ 0 ] == "read" )
        return request::read( nat( w[ 1 ] ) );
    if ( w.size() == 1 && w[ 0 ] == "refresh" )
        return request::refresh();
    throw parse_error( line_no, "unknown memory request: '" + std::string( line ) + "'" );
}

inline requests parse_requests( std::istream& in )
{
    requests out;
    text::for_each_line( in, [ & ]( std::size_t no, std::string_view line ) {
        out.push_back( parse_request( line, no ) );
    } );
    return out;
}

inline memory parse_memory( std::string_view list )
{
    memory out;
    for ( auto v : text::parse_int_list( list ) )
    {
        if ( v < 0 )
            throw std::invalid_argument( "memory values must be natural numbers" );
        out.push_back( static_cast< value_t >( v ) );
    }
    return out;
}

inline std::string to_string( const request& r )
{
    switch ( r.kind )
    {
    case request_kind::write: return "write " + std::to_string( r.addr ) + " " + std::to_string( r.value );
    case request_kind::read: return "read " + std::to_string( r.addr );
    case request_kind::refresh: return "refresh";
    }
    return "?";
}

inline void write_requests( std::ostream& out, const requests& reqs )
{
    for ( const auto& r : reqs )
        out << to_string( r ) << '\n';
}

inline void to_json( nlohmann::json& j, const request& r ) { j = to_string( r ); }

inline void to_json( nlohmann::json& j, const mstate& s )
{
    j = nlohmann::json{ { "reqs", s.reqs }, { "pt", s.pt }, { "mem", s.mem } };
}

inline void to_json( nlohmann::json& j, const opt_mstate& s )
{
    j = nlohmann::json{ { "reqs", s.reqs }, { "pt", s.pt }, { "rbuf", s.rbuf }, { "mem", s.mem } };
}

} // namespace skipref::memc
