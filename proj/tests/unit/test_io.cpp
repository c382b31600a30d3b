#include "hdport/errors.hpp"
#include "hdport/io/keyvalue.hpp"
#include "hdport/io/table.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>

using namespace hdp;
using namespace hdp::io;

// ---------------------------------------------------------------------------
// Key-value config

TEST(KeyValue, ParsesCommentsAndWhitespace) {
    std::istringstream in("# sweep\nT = 100\n\n  reps=500   # trailing\nN_list = 20, 50 ,80,\nname = a=b\n");
    const auto c = KeyValueConfig::parse(in);
    EXPECT_EQ(c.entries().size(), 4u);
    EXPECT_EQ(c.get_int("T"), 100);
    EXPECT_EQ(c.get_double("reps"), 500.0);
    EXPECT_EQ(c.get_list("N_list"), (std::vector<std::string>{"20", "50", "80"}));
    EXPECT_EQ(c.find("name").value(), "a=b");
    EXPECT_FALSE(c.find("missing").has_value());
    EXPECT_FALSE(c.has("t"));
}

TEST(KeyValue, Errors) {
    auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return KeyValueConfig::parse(in);
    };
    EXPECT_THROW(parse("T = 1\nT = 2\n"), SchemaError);
    EXPECT_THROW(parse("just words\n"), SchemaError);
    EXPECT_THROW(parse(" = 3\n"), SchemaError);
    const auto c = parse("T = 1.5\nx = abc\n");
    EXPECT_THROW(c.get_int("T"), SchemaError);
    EXPECT_THROW(c.get_int("absent"), SchemaError);
    try {
        c.get_double("x");
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("'x'"), std::string::npos);
    }
    EXPECT_NO_THROW(c.require_known({"T", "x", "y"}));
    try {
        c.require_known({"T"});
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("'x'"), std::string::npos);
    }
    EXPECT_THROW(KeyValueConfig::parse_file("/nonexistent/cfg.txt"), IoError);
}

// ---------------------------------------------------------------------------
// Cells and numbers

TEST(Cells, SplitTrimAndDelimiter) {
    EXPECT_EQ(split_line(" a , b,,c \r", ','), (std::vector<std::string>{"a", "b", "", "c"}));
    EXPECT_EQ(detect_delimiter("a;b"), ';');
    EXPECT_EQ(detect_delimiter("a\tb;c"), '\t');
    EXPECT_EQ(detect_delimiter("a,b"), ',');
    EXPECT_EQ(trim("  \t"), "");
}

TEST(Cells, ParseNumber) {
    EXPECT_EQ(parse_number("1e-3", "c"), 1e-3);
    EXPECT_EQ(parse_number("+2.5", "c"), 2.5);
    EXPECT_EQ(parse_number("-0", "c"), 0.0);
    EXPECT_TRUE(std::isnan(parse_number("nan", "c")));
    EXPECT_THROW(parse_number("", "c"), SchemaError);
    EXPECT_THROW(parse_number("1.0x", "c"), SchemaError);
    EXPECT_THROW(parse_number("0x10", "c"), SchemaError);
}

TEST(Cells, FormatRoundTrips) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::uint64_t> bits;
    int checked = 0;
    while (checked < 2000) {
        const std::uint64_t b = bits(rng);
        double v;
        std::memcpy(&v, &b, sizeof v);
        if (!std::isfinite(v)) continue;
        EXPECT_EQ(parse_number(format_number(v), "c"), v);
        ++checked;
    }
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Cells, OutputFormat) {
    EXPECT_EQ(parse_output_format("csv"), OutputFormat::Delimited);
    EXPECT_EQ(parse_output_format("json"), OutputFormat::Structured);
    EXPECT_THROW(parse_output_format("xml"), ValidationError);
}

// ---------------------------------------------------------------------------
// Table

TEST(TableOut, DelimitedLayout) {
    Table t({"N", "value", "label"});
    t.add_row({10LL, 0.25, std::string("x")});
    t.add_row({20LL, std::numeric_limits<double>::quiet_NaN(), std::string("y")});
    std::ostringstream os;
    t.write(os, OutputFormat::Delimited);
    EXPECT_EQ(os.str(), "N,value,label\n10,0.25,x\n20,nan,y\n");
    EXPECT_THROW(t.add_row({1LL}), ValidationError);
}

TEST(TableOut, StructuredLayout) {
    Table t({"N", "value"});
    t.add_row({10LL, 1.0 / 3.0});
    t.add_row({20LL, std::numeric_limits<double>::infinity()});
    std::ostringstream os;
    t.write(os, OutputFormat::Structured);
    const auto doc = nlohmann::json::parse(os.str());
    EXPECT_EQ(doc["columns"], nlohmann::json({"N", "value"}));
    EXPECT_EQ(doc["rows"][0][0].get<long long>(), 10);
    EXPECT_EQ(doc["rows"][0][1].get<double>(), 1.0 / 3.0);
    EXPECT_EQ(doc["rows"][1][1].get<std::string>(), "inf");
}
