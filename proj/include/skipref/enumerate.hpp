#pragma once

#include <cstddef>
#include <vector>

namespace skipref
{

// All sequences over `letters` of length 0..max_len, shortest first.
template < class T, class Fn >
void for_each_sequence( const std::vector< T >& letters, std::size_t max_len, Fn&& fn )
{
    std::vector< T > seq;
    std::vector< std::size_t > idx;
    for ( std::size_t len = 0; len <= max_len; ++len )
    {
        idx.assign( len, 0 );
        for ( ;; )
        {
            seq.clear();
            for ( auto i : idx )
                seq.push_back( letters[ i ] );
            fn( seq );
            std::size_t pos = len;
            while ( pos > 0 && ++idx[ pos - 1 ] == letters.size() )
                idx[ --pos ] = 0;
            if ( pos == 0 )
                break;
        }
        if ( letters.empty() )
            break;
    }
}

inline std::size_t sequence_count( std::size_t letters, std::size_t max_len )
{
    std::size_t total = 0, p = 1;
    for ( std::size_t len = 0; len <= max_len; ++len, p *= letters )
        total += p;
    return total;
}

} // namespace skipref
