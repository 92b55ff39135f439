// skipcheck: command-line front end for the skipping-refinement checker.
//
// Exit status: 0 on success, 1 when a check finds a counterexample or a
// validation fails, 2 on configuration or input errors.

#include "skipref/des.hpp"
#include "skipref/memctl.hpp"
#include "skipref/model_check.hpp"
#include "skipref/slp.hpp"
#include "skipref/stack_machine.hpp"

#include "CLI11.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

namespace
{

using namespace skipref;
using json = nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_failed = 1;
constexpr int exit_config = 2;

std::ifstream open_input( const std::string& path )
{
    std::ifstream in( path );
    if ( !in )
        throw config_error( "cannot open '" + path + "'" );
    return in;
}

template < class T >
std::vector< T > parse_list( const std::string& s, const char* what )
{
    std::vector< T > out;
    for ( auto v : text::parse_int_list( s ) )
    {
        if constexpr ( std::is_unsigned_v< T > )
            if ( v < 0 )
                throw config_error( std::string( what ) + " must be non-negative" );
        out.push_back( static_cast< T >( v ) );
    }
    if ( out.empty() )
        throw config_error( std::string( what ) + " must not be empty" );
    return out;
}

// ---------------------------------------------------------------- check

struct check_options
{
    std::string model;
    std::string mode = "exhaustive";
    std::string format = "table";
    std::string elems = "0,1";
    std::string addrs = "0,1,2";
    std::string vals = "0,1";
    std::optional< std::uint64_t > seed;
    domain_spec dom;
};

void print_table( const check_report& rep )
{
    auto row = [ & ]( const std::string& k, const auto& v ) { std::cout << std::left << std::setw( 18 ) << k << v << '\n'; };
    row( "model", rep.model );
    row( "mode", rep.mode );
    row( "states checked", rep.states_checked );
    row( "non-good states", rep.non_good_states );
    row( "obligations", rep.obligations );
    for ( const auto& [ k, v ] : rep.histogram )
        row( "  " + k, v );
    std::ostringstream steps;
    for ( const auto& [ m, n ] : rep.step_histogram )
        steps << m << ':' << n << ' ';
    row( "abstract steps", steps.str() );
    row( "counterexamples", rep.counterexample_total );
    std::ostringstream wall;
    wall << std::fixed << std::setprecision( 1 ) << rep.wall_ms << " ms";
    row( "wall time", wall.str() );
    row( "result", rep.passed() ? "PASS" : "FAIL" );
    for ( const auto& c : rep.counterexamples )
        std::cout << c.dump() << '\n';
}

int cmd_check( check_options& o )
{
    if ( o.mode == "exhaustive" )
        o.dom.mode = check_mode::exhaustive;
    else if ( o.mode == "random" )
    {
        if ( !o.seed )
            throw config_error( "random mode requires --seed" );
        o.dom.mode = check_mode::random;
    }
    else
        throw config_error( "unknown mode '" + o.mode + "'" );
    if ( o.seed )
        o.dom.seed = *o.seed;
    o.dom.elements = parse_list< std::int64_t >( o.elems, "--elems" );
    o.dom.addrs = parse_list< std::size_t >( o.addrs, "--addrs" );
    o.dom.values = parse_list< std::uint64_t >( o.vals, "--vals" );

    const auto rep = check_model( o.model, o.dom );
    if ( o.format == "json" )
        std::cout << rep.to_json().dump( 2 ) << '\n';
    else
        print_table( rep );
    return rep.passed() ? exit_ok : exit_failed;
}

// ---------------------------------------------------------------- vectorize

struct vec_options
{
    std::string input;
    std::string output;
    std::string source;
    std::size_t stores = 64;
    std::uint64_t seed = 1;
    bool force = false;
    bool history_pc = false;
    bool unsafe = false;
    std::string format = "table";
};

void print_validation( const slp::validation_report& rep, const std::string& format )
{
    if ( format == "json" )
    {
        json j{ { "ok", rep.ok() },
                { "scalarization_matches", rep.scalarization_matches },
                { "final_stores_match", rep.final_stores_match },
                { "final_pc_matches", rep.final_pc_matches },
                { "stores_checked", rep.stores_checked },
                { "steps_checked", rep.steps_checked },
                { "verdicts", rep.histogram },
                { "message", rep.message } };
        if ( rep.failing_step )
        {
            j[ "failing_store" ] = *rep.failing_store;
            j[ "failing_step" ] = *rep.failing_step;
            j[ "failing_state" ] = *rep.failing_state;
        }
        std::cerr << j.dump( 2 ) << '\n';
        return;
    }
    std::cerr << "validation: " << ( rep.ok() ? "OK" : "FAILED" ) << " (" << rep.stores_checked << " stores, "
              << rep.steps_checked << " vector steps";
    for ( const auto& [ k, v ] : rep.histogram )
        std::cerr << ", " << k << ' ' << v;
    std::cerr << ")\n";
    if ( !rep.ok() )
    {
        std::cerr << "  " << rep.message << '\n';
        if ( rep.failing_state )
            std::cerr << "  state: " << json( *rep.failing_state ).dump() << '\n';
    }
}

std::vector< slp::store_t > validation_stores( const slp::scalar_program& src, const vec_options& o )
{
    return slp::sample_stores( slp::variables_of( src ), o.stores, o.seed );
}

int cmd_vectorize( const vec_options& o )
{
    auto in = open_input( o.input );
    const auto src = slp::parse_scalar_program( in );
    const auto vprg = slp::vectorize( src, { .check_dependence = !o.unsafe } );
    const auto rep = slp::validate( src, vprg, validation_stores( src, o ), { o.history_pc } );
    print_validation( rep, o.format );
    if ( !rep.ok() && !o.force )
    {
        std::cerr << "refusing to write an unvalidated program (use --force)\n";
        return exit_failed;
    }
    if ( o.output.empty() || o.output == "-" )
        slp::write_program( std::cout, vprg );
    else
    {
        std::ofstream out( o.output );
        if ( !out )
            throw config_error( "cannot write '" + o.output + "'" );
        slp::write_program( out, vprg );
    }
    return rep.ok() ? exit_ok : exit_failed;
}

int cmd_validate( const vec_options& o )
{
    auto in = open_input( o.input );
    const auto vprg = slp::parse_vector_program( in );
    slp::scalar_program src;
    if ( o.source.empty() )
        src = slp::scalarize_vprg( vprg );
    else
    {
        auto sin = open_input( o.source );
        src = slp::parse_scalar_program( sin );
    }
    const auto rep = slp::validate( src, vprg, validation_stores( src, o ), { o.history_pc } );
    print_validation( rep, o.format );
    return rep.ok() ? exit_ok : exit_failed;
}

// ---------------------------------------------------------------- des

struct des_options
{
    std::string input;
    std::size_t steps = 10;
    std::string mutant = "none";
    std::string format = "table";
};

int cmd_des( const des_options& o )
{
    auto in = open_input( o.input );
    const auto model = des::parse_model( in );
    const auto rep = des::match_skipping_trace( model.initial, model.defs, o.steps, parse_des_mutant( o.mutant ) );

    if ( o.format == "json" )
    {
        auto steps = json::array();
        for ( const auto& st : rep.steps )
            steps.push_back( json{ { "step", st.index },
                                   { "state", st.after },
                                   { "skip_count", st.skip_count },
                                   { "abstract_steps", st.abstract_steps ? json( *st.abstract_steps ) : json() } } );
        json j{ { "initial", model.initial }, { "steps", steps }, { "match", rep.ok() } };
        if ( rep.mismatch_step )
            j[ "mismatch_step" ] = *rep.mismatch_step;
        std::cout << j.dump( 2 ) << '\n';
    }
    else
    {
        std::cout << "step 0: " << json( model.initial ).dump() << '\n';
        for ( const auto& st : rep.steps )
        {
            std::cout << "step " << st.index << ": " << json( st.after ).dump() << "  skip " << st.skip_count;
            std::cout << ( st.abstract_steps ? "  match" : "  MISMATCH" ) << '\n';
        }
        if ( rep.ok() )
            std::cout << "match OK (" << rep.steps.size() << " steps)\n";
        else
            std::cout << "mismatch at step " << *rep.mismatch_step << ": no abstract run of "
                      << rep.steps.back().skip_count << " steps from " << json( rep.steps.back().before ).dump()
                      << " reaches " << json( rep.steps.back().after ).dump() << '\n';
    }
    return rep.ok() ? exit_ok : exit_failed;
}

// ---------------------------------------------------------------- run

struct run_options
{
    std::string machine;
    std::string input;
    std::size_t steps = 0;
    bool steps_given = false;
    std::size_t capacity = 2;
    std::size_t mem_size = 4;
    std::string mem;
    std::string store;
    std::string format = "table";
};

template < class State, class Step >
void print_trace( const State& start, std::size_t n, Step step, const std::string& format )
{
    State s = start;
    auto trace = json::array();
    for ( std::size_t i = 0; i <= n; ++i )
    {
        if ( format == "json" )
            trace.push_back( s );
        else
            std::cout << i << ": " << json( s ).dump() << '\n';
        if ( i < n )
            s = step( s );
    }
    if ( format == "json" )
        std::cout << trace.dump( 2 ) << '\n';
}

int cmd_run( const run_options& o )
{
    auto in = open_input( o.input );
    const auto& m = o.machine;
    if ( m == "stk" || m == "bstk" )
    {
        const auto prog = stack::parse_program( in );
        const std::size_t n = o.steps_given ? o.steps : prog.size() + 1;
        stack::config cfg{ o.capacity, std::nullopt, stack::mutant::none };
        if ( m == "stk" )
            print_trace( stack::sstate{ prog, 0, {} }, n, []( const auto& s ) { return stack::spec_step( s ); },
                         o.format );
        else
            print_trace( stack::istate{ prog, 0, {}, {} }, n,
                         [ & ]( const auto& s ) { return stack::impl_step( s, cfg ); }, o.format );
        return exit_ok;
    }
    if ( m == "memc" || m == "optmemc" )
    {
        const auto reqs = memc::parse_requests( in );
        const auto mem = o.mem.empty() ? memc::memory( o.mem_size, 0 ) : memc::parse_memory( o.mem );
        const std::size_t n = o.steps_given ? o.steps : reqs.size() + 1;
        memc::config cfg{ o.capacity, false, memc::mutant::none };
        if ( m == "memc" )
            print_trace( memc::mstate{ reqs, 0, mem }, n, []( const auto& s ) { return memc::spec_step( s ); },
                         o.format );
        else
            print_trace( memc::opt_mstate{ reqs, 0, {}, mem }, n,
                         [ & ]( const auto& s ) { return memc::impl_step( s, cfg ); }, o.format );
        return exit_ok;
    }
    if ( m == "scalar" )
    {
        const auto prog = slp::parse_scalar_program( in );
        print_trace( slp::scalar_state{ prog, 0, slp::parse_store( o.store ) }, o.steps_given ? o.steps : prog.size(),
                     []( const auto& s ) { return slp::spec_step( s ); }, o.format );
        return exit_ok;
    }
    if ( m == "vector" )
    {
        const auto prog = slp::parse_vector_program( in );
        print_trace( slp::vector_state{ prog, 0, slp::parse_store( o.store ) }, o.steps_given ? o.steps : prog.size(),
                     []( const auto& s ) { return slp::vec_step( s ); }, o.format );
        return exit_ok;
    }
    if ( m == "des" )
    {
        const auto model = des::parse_model( in );
        print_trace( model.initial, o.steps_given ? o.steps : 10,
                     [ & ]( const auto& s ) { return des::opt_step( s, model.defs ).state; }, o.format );
        return exit_ok;
    }
    throw config_error( "unknown machine '" + m + "'" );
}

} // namespace

int main( int argc, char** argv )
{
    CLI::App app{ "Skipping-refinement checker for optimized reactive systems" };
    app.require_subcommand( 1 );

    // check
    check_options co;
    auto* check = app.add_subcommand( "check", "Check the skipping obligation over a bounded or sampled domain" );
    check->add_option( "model", co.model, "stack | memc | vec | des" )
        ->required()
        ->check( CLI::IsMember( { "stack", "memc", "vec", "des" } ) );
    check->add_option( "--mode", co.mode, "exhaustive | random" )->capture_default_str();
    check->add_option( "--capacity,-k", co.dom.capacity, "Buffer capacity k (stack, memc)" )->capture_default_str();
    check->add_option( "--elems", co.elems, "Stack element domain, comma separated" )->capture_default_str();
    check->add_option( "--imem-max", co.dom.imem_max, "Maximum program length (stack)" )->capture_default_str();
    check->add_option( "--stack-max", co.dom.stack_max, "Maximum committed stack depth" )->capture_default_str();
    check->add_option( "--pc-overrun", co.dom.pc_overrun, "Committed pcs past the program end" )
        ->capture_default_str();
    check->add_option( "--addrs", co.addrs, "Address domain (memc)" )->capture_default_str();
    check->add_option( "--vals", co.vals, "Value domain (memc)" )->capture_default_str();
    check->add_option( "--mem-size", co.dom.mem_size, "Memory size (memc)" )->capture_default_str();
    check->add_option( "--reqs-max", co.dom.reqs_max, "Maximum request queue length (memc)" )->capture_default_str();
    check->add_option( "--prog-max", co.dom.prog_max, "Maximum scalar program length (vec)" );
    check->add_option( "--vars", co.dom.vars, "Number of variables (vec)" );
    check->add_option( "--stores", co.dom.stores_per_program, "Initial stores per program (vec, exhaustive)" )
        ->capture_default_str();
    check->add_option( "--events-max", co.dom.max_events, "Maximum events per table (des)" )->capture_default_str();
    check->add_option( "--delta-max", co.dom.max_delta, "Maximum spawn delay (des)" )->capture_default_str();
    check->add_option( "--steps", co.dom.des_steps, "Optimized steps per table (des)" )->capture_default_str();
    check->add_option( "--seed", co.seed, "Random seed (required in random mode)" );
    check->add_option( "--samples", co.dom.samples, "Random samples" )->capture_default_str();
    check->add_option( "--format", co.format, "table | json" )
        ->check( CLI::IsMember( { "table", "json" } ) )
        ->capture_default_str();
    check->add_option( "--cex-cap", co.dom.cex_cap, "Counterexamples to report" )->capture_default_str();
    check->add_option( "--mutant", co.dom.mutant, "Seeded bug to enable" )->capture_default_str();
    check->add_option( "--workers", co.dom.workers, "Worker threads (default: SKIPCHECK_WORKERS or all cores)" );

    // vectorize / validate-vec
    vec_options vo;
    auto* vectorize = app.add_subcommand( "vectorize", "Pack a scalar program and validate the result" );
    vectorize->add_option( "input", vo.input, "Scalar program file" )->required();
    vectorize->add_option( "-o,--output", vo.output, "Vector program output (default stdout)" );
    vectorize->add_flag( "--force", vo.force, "Write the output even if validation fails" );
    vectorize->add_flag( "--no-dependence-check", vo.unsafe, "Pack dependent pairs too (for testing validation)" );

    vec_options vv;
    auto* validate = app.add_subcommand( "validate-vec", "Validate a vector program against its source" );
    validate->add_option( "input", vv.input, "Vector program file" )->required();
    validate->add_option( "--source", vv.source, "Scalar source program (default: its scalarization)" );

    for ( auto [ sub, opts ] : { std::pair{ vectorize, &vo }, std::pair{ validate, &vv } } )
    {
        sub->add_option( "--stores", opts->stores, "Initial stores to validate on" )->capture_default_str();
        sub->add_option( "--seed", opts->seed, "Seed for the sampled stores" )->capture_default_str();
        sub->add_flag( "--history-pc", opts->history_pc, "Track the scalar pc incrementally" );
        sub->add_option( "--format", opts->format, "table | json" )->check( CLI::IsMember( { "table", "json" } ) );
    }

    // des
    des_options dopt;
    auto* des_cmd = app.add_subcommand( "des", "Run the optimized simulator and match it against the abstract one" );
    des_cmd->add_option( "input", dopt.input, "Event table file" )->required();
    des_cmd->add_option( "--steps,-n", dopt.steps, "Optimized steps" )->capture_default_str();
    des_cmd->add_option( "--mutant", dopt.mutant, "none | keep-executed" )->capture_default_str();
    des_cmd->add_option( "--format", dopt.format, "table | json" )->check( CLI::IsMember( { "table", "json" } ) );

    // run
    run_options ro;
    auto* run_cmd = app.add_subcommand( "run", "Print a single-machine trace" );
    run_cmd->add_option( "machine", ro.machine, "stk | bstk | memc | optmemc | scalar | vector | des" )
        ->required()
        ->check( CLI::IsMember( { "stk", "bstk", "memc", "optmemc", "scalar", "vector", "des" } ) );
    run_cmd->add_option( "input", ro.input, "Program, request or event file" )->required();
    auto* steps_opt = run_cmd->add_option( "--steps,-n", ro.steps, "Steps to run" );
    run_cmd->add_option( "--capacity,-k", ro.capacity, "Buffer capacity" )->capture_default_str();
    run_cmd->add_option( "--mem-size", ro.mem_size, "Zero-filled memory size" )->capture_default_str();
    run_cmd->add_option( "--mem", ro.mem, "Initial memory, comma separated" );
    run_cmd->add_option( "--store", ro.store, "Initial store, e.g. a=1,b=2" );
    run_cmd->add_option( "--format", ro.format, "table | json" )->check( CLI::IsMember( { "table", "json" } ) );

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::ParseError& e )
    {
        const int code = app.exit( e );
        return code == 0 ? exit_ok : exit_config;
    }

    try
    {
        if ( *check )
            return cmd_check( co );
        if ( *vectorize )
            return cmd_vectorize( vo );
        if ( *validate )
            return cmd_validate( vv );
        if ( *des_cmd )
            return cmd_des( dopt );
        if ( *run_cmd )
        {
            ro.steps_given = steps_opt->count() > 0;
            return cmd_run( ro );
        }
    }
    catch ( const parse_error& e )
    {
        std::cerr << "parse error: " << e.what() << '\n';
        return exit_config;
    }
    catch ( const std::invalid_argument& e )
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }
    catch ( const std::exception& e )
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }
    return exit_config;
}
