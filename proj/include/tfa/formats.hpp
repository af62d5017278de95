// Line-oriented text formats for automata and cascades. '#' starts a comment.
//
// FSA:
//   states: A B
//   alphabet: 0 1
//   0: A A          delta(0, A) = A, delta(0, B) = A (positional, per states line)
//   1: B B
//   cover: A -> X   optional covering pairs (used by `cover check`)
//
// Cascade:
//   alphabet: a b c
//   component 0 [name]:
//   states: r0 r1
//   a: r0 r0                    component 0 has no upstream columns
//   component 1 [name]:
//   states: p0 p1
//   a r0: p0 p1                 symbol, then one upstream state per earlier component
//   cover: (r0,p0) -> s0        optional covering pairs from joint states
//
// Every (symbol, upstream) row must be present exactly once.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tfa/automata.hpp"
#include "tfa/cascade.hpp"

namespace tfa {

class FormatError : public std::runtime_error {
public:
    FormatError(std::size_t line, const std::string& message);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

using CoverPairs = std::vector<std::pair<std::string, std::string>>;

struct FsaDocument {
    Fsa fsa;
    CoverPairs cover;
};

struct CascadeDocument {
    Cascade cascade;
    CoverPairs cover;
};

FsaDocument parse_fsa(const std::string& text);
std::string write_fsa(const Fsa& a, const CoverPairs& cover = {});

CascadeDocument parse_cascade(const std::string& text);
std::string write_cascade(const Cascade& c, const CoverPairs& cover = {});

std::string read_text_file(const std::string& path);

}  // namespace tfa
