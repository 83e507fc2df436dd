#include "nct/reduce.hpp"

#include "nct/error.hpp"
#include "test_util.hpp"

#include "doctest.h"

#include <string>
#include <vector>

using namespace nct;

namespace {

std::vector<std::string> color_tokens(const std::string& colored) {
    // last token of each data record
    auto doc = parse_kern(colored, "colored");
    std::vector<std::string> out;
    for (std::size_t r = 0; r < doc.records.size(); ++r)
        if (doc.records[r].kind == RecordKind::data)
            out.push_back(doc.records[r].tokens.back());
    return out;
}

const std::string kTinyScore =
    "**kern\n"
    "*M4/4\n"
    "*C:\n"
    "4c\n"
    "4d\n"
    "2e\n"
    "=1\n"
    "*-\n";

} // namespace

TEST_CASE("threshold rule maps probabilities to colors") {
    auto doc = parse_kern(kTinyScore, "tiny");
    auto melody = select_melody(doc);
    std::string colored = colorize(doc, melody, {0.9, 0.2, 0.5});
    auto tokens = color_tokens(colored);
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[0] == "black");
    CHECK(tokens[1] == "hotpink");
    CHECK(tokens[2] == "black"); // 0.5 >= 0.5 is a chord tone

    ReduceConfig all_ct;
    all_ct.threshold = 0.0;
    tokens = color_tokens(colorize(doc, melody, {0.9, 0.2, 0.5}, all_ct));
    for (const auto& t : tokens) CHECK(t == "black");
}

TEST_CASE("colorized output parses with one extra spine and equal records") {
    for (const char* name : {"cmaj_passing.krn", "aminor_neighbor.krn", "gmaj_applied.krn"}) {
        std::string text = read_file(mini_corpus_path(name));
        auto doc = parse_kern(text, name);
        auto melody = select_melody(doc);
        std::size_t n_notes = 0;
        for (const auto& ev : melody) n_notes += !ev.is_rest && !ev.is_grace;
        std::vector<double> probs(n_notes, 0.4);
        std::string colored = colorize(doc, melody, probs);

        auto recheck = parse_kern(colored, "colored");
        CHECK(recheck.spine_count() == doc.spine_count() + 1);
        CHECK(recheck.records.size() == doc.records.size());
        CHECK(recheck.spines.back().exclusive_interp == "**color");
    }
}

TEST_CASE("stripping the color spine recovers the input byte-exactly") {
    for (const char* name : {"cmaj_passing.krn", "aminor_neighbor.krn", "gmaj_applied.krn"}) {
        std::string text = read_file(mini_corpus_path(name));
        auto doc = parse_kern(text, name);
        auto melody = select_melody(doc);
        std::size_t n_notes = 0;
        for (const auto& ev : melody) n_notes += !ev.is_rest && !ev.is_grace;
        std::vector<double> probs;
        for (std::size_t i = 0; i < n_notes; ++i) probs.push_back(0.1 + 0.8 * (i % 2));
        CHECK(strip_color(colorize(doc, melody, probs)) == text);
    }
}

TEST_CASE("raising the threshold never turns pink back to black") {
    auto doc = parse_kern(read_file(mini_corpus_path("cmaj_passing.krn")), "c");
    auto melody = select_melody(doc);
    std::vector<double> probs = {0.1, 0.3, 0.45, 0.5, 0.62, 0.7, 0.8, 0.95, 0.2, 0.55};
    std::vector<std::string> prev;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        ReduceConfig cfg;
        cfg.threshold = t;
        auto tokens = color_tokens(colorize(doc, melody, probs, cfg));
        if (!prev.empty()) {
            REQUIRE(tokens.size() == prev.size());
            for (std::size_t i = 0; i < tokens.size(); ++i)
                if (prev[i] == "hotpink") CHECK(tokens[i] == "hotpink");
        }
        prev = tokens;
    }
}

TEST_CASE("tie chains share one color and graces get the unscored color") {
    auto doc = parse_kern(read_file(mini_corpus_path("cmaj_passing.krn")), "c");
    auto melody = select_melody(doc);
    // note 5 is the tied G: give it a non-chord-tone probability
    std::vector<double> probs = {0.9, 0.9, 0.9, 0.9, 0.9, 0.1, 0.9, 0.9, 0.9, 0.9};
    auto tokens = color_tokens(colorize(doc, melody, probs));
    // 11 data records: 10 notes, one of them a tied pair
    REQUIRE(tokens.size() == 11);
    CHECK(tokens[5] == "hotpink"); // [4g
    CHECK(tokens[6] == "hotpink"); // 2g]

    auto rdoc = parse_kern(read_file(mini_corpus_path("gmaj_applied.krn")), "g");
    auto rmel = select_melody(rdoc);
    std::vector<double> rprobs(8, 0.9);
    auto rtokens = color_tokens(colorize(rdoc, rmel, rprobs));
    REQUIRE(rtokens.size() == 9);
    CHECK(rtokens[4] == "."); // the rest carries no color

    auto gdoc = parse_kern(read_file(mini_corpus_path("aminor_neighbor.krn")), "a");
    auto gmel = select_melody(gdoc);
    std::vector<double> gprobs(9, 0.9);
    ReduceConfig cfg;
    cfg.unscored_color = "silver";
    auto gtokens = color_tokens(colorize(gdoc, gmel, gprobs, cfg));
    REQUIRE(gtokens.size() == 10); // 9 notes + 1 grace record
    CHECK(gtokens[6] == "silver"); // the grace ccq row
}

TEST_CASE("alignment mismatch is rejected") {
    auto doc = parse_kern(kTinyScore, "tiny");
    auto melody = select_melody(doc);
    CHECK_THROWS_AS(colorize(doc, melody, {0.5, 0.5}), Error);
    try {
        colorize(doc, melody, {0.5, 0.5, 0.5, 0.5});
        FAIL("expected AlignmentMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == errc::alignment_mismatch);
    }
}
