#include "crown/csv_panel.hpp"
#include "crown/error.hpp"

#include <doctest.h>

#include <sstream>

using namespace crown;

namespace {

DatedPanel parse(const std::string& text, PanelKind kind = PanelKind::Returns) {
    std::istringstream in(text);
    return read_panel(in, kind, "test.csv");
}

std::string message_of(const std::string& text) {
    try {
        parse(text);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        return e.what();
    }
    FAIL("expected ParseError");
    return {};
}

}  // namespace

TEST_CASE("well-formed panel") {
    const auto p = parse(
        "date,A,B,C\n"
        "2020-01-31,0.01,0.02,0.03\n"
        "2020-02-29,-0.01,0.00,0.01\n"
        "2020-03-31,0.02,0.01,-0.02\n"
        "2020-04-30,0.00,0.03,0.01\n"
        "2020-05-31,0.01,-0.01,0.00\n");
    CHECK(p.num_series() == 3);
    CHECK(p.num_periods() == 5);
    CHECK(p.names == std::vector<std::string>{"A", "B", "C"});
    CHECK(p.values(1, 0) == 0.02);
    CHECK(p.values(0, 1) == -0.01);
    const auto r = to_return_panel(p);
    CHECK(r.num_assets() == 3);
    CHECK(r.dates.back() == "2020-05-31");
}

TEST_CASE("parse errors name the location") {
    const std::string msg = message_of("date,A,B\n2020-01-31,0.01,abc\n");
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("column 3") != std::string::npos);
    CHECK(msg.find("'B'") != std::string::npos);
    CHECK(msg.find("abc") != std::string::npos);

    CHECK(message_of("when,A\n2020-01-31,1\n").find("date") != std::string::npos);
    CHECK(message_of("date,A\n2020-13-01,1\n").find("ISO-8601") != std::string::npos);
    CHECK(message_of("date,A\n2020-01-31,1\n2020-01-30,1\n").find("not after") != std::string::npos);
    CHECK(message_of("date,A,B\n2020-01-31,1\n").find("fields") != std::string::npos);
    CHECK(message_of("date,A\n2020-01-31,\n").find("cannot parse") != std::string::npos);
    CHECK(message_of("").find("empty") != std::string::npos);
}

TEST_CASE("date alignment") {
    const auto a = parse("date,A\n2020-01-31,1\n2020-02-29,1\n2020-03-31,1\n");
    const auto b = parse("date,F\n2020-01-31,1\n2020-02-28,1\n2020-03-31,1\n", PanelKind::Factors);
    try {
        check_aligned(a, b);
        FAIL("expected DateMisalignment");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DateMisalignment);
        CHECK(std::string(e.what()).find("2020-02-29") != std::string::npos);
    }
    check_aligned(a, a);
}

TEST_CASE("benchmark checks") {
    const auto r = parse("date,A,B\n2020-01-31,0.1,0.2\n2020-02-29,0.1,0.2\n");
    check_benchmark(r, parse("date,A,B\n2020-01-31,0.5,0.5\n2020-02-29,0.3,0.7\n", PanelKind::Benchmark));
    CHECK_THROWS_AS(check_benchmark(r, parse("date,A,B\n2020-01-31,0.5,0.6\n2020-02-29,0.3,0.7\n",
                                             PanelKind::Benchmark)),
                    Error);
    CHECK_THROWS_AS(check_benchmark(r, parse("date,B,A\n2020-01-31,0.5,0.5\n2020-02-29,0.3,0.7\n",
                                             PanelKind::Benchmark)),
                    Error);
}

TEST_CASE("write and read back") {
    const auto p = parse("date,A,B\n2020-01-31,0.1234567890123,-2e-5\n2020-02-29,1,2\n");
    std::ostringstream out;
    write_panel(out, p);
    const auto q = parse(out.str());
    CHECK((p.values.array() == q.values.array()).all());
    CHECK(p.dates == q.dates);
}
