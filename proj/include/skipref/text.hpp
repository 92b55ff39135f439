#pragma once

#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace skipref
{

class parse_error : public std::runtime_error
{
public:
    parse_error( std::size_t line, const std::string& what )
        : std::runtime_error( "line " + std::to_string( line ) + ": " + what ), _line{ line }
    {
    }

    [[nodiscard]] std::size_t line() const { return _line; }

private:
    std::size_t _line;
};

namespace text
{

inline std::string_view trim( std::string_view s )
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of( ws );
    if ( b == std::string_view::npos )
        return {};
    const auto e = s.find_last_not_of( ws );
    return s.substr( b, e - b + 1 );
}

inline std::vector< std::string > words( std::string_view s )
{
    std::vector< std::string > out;
    std::istringstream in{ std::string( s ) };
    for ( std::string w; in >> w; )
        out.push_back( std::move( w ) );
    return out;
}

inline std::vector< std::string_view > split( std::string_view s, char sep )
{
    std::vector< std::string_view > out;
    std::size_t start = 0;
    for ( ;; )
    {
        const auto pos = s.find( sep, start );
        out.push_back( trim( s.substr( start, pos - start ) ) );
        if ( pos == std::string_view::npos )
            return out;
        start = pos + 1;
    }
}

template < class Int >
std::optional< Int > to_int( std::string_view s )
{
    s = trim( s );
    if ( !s.empty() && s.front() == '+' )
        s.remove_prefix( 1 );
    Int v{};
    const auto [ ptr, ec ] = std::from_chars( s.data(), s.data() + s.size(), v );
    if ( ec != std::errc{} || ptr != s.data() + s.size() || s.empty() )
        return std::nullopt;
    return v;
}

inline bool is_identifier( std::string_view s )
{
    if ( s.empty() || !( std::isalpha( static_cast< unsigned char >( s[ 0 ] ) ) || s[ 0 ] == '_' ) )
        return false;
    for ( char c : s )
        if ( !( std::isalnum( static_cast< unsigned char >( c ) ) || c == '_' ) )
            return false;
    return true;
}

// Calls fn(line_number, content) for each non-blank line, with '#' comments
// stripped.
template < class Fn >
void for_each_line( std::istream& in, Fn&& fn )
{
    std::string line;
    for ( std::size_t no = 1; std::getline( in, line ); ++no )
    {
        std::string_view view = line;
        if ( const auto hash = view.find( '#' ); hash != std::string_view::npos )
            view = view.substr( 0, hash );
        view = trim( view );
        if ( !view.empty() )
            fn( no, view );
    }
}

inline std::vector< std::int64_t > parse_int_list( std::string_view s )
{
    std::vector< std::int64_t > out;
    if ( trim( s ).empty() )
        return out;
    for ( auto part : split( s, ',' ) )
    {
        auto v = to_int< std::int64_t >( part );
        if ( !v )
            throw std::invalid_argument( "not an integer list: " + std::string( s ) );
        out.push_back( *v );
    }
    return out;
}

} // namespace text
} // namespace skipref
