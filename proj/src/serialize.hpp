#pragma once

#include "core.hpp"

namespace hperm {

struct MultiGroupNetwork;

// JSON array of targets, or one integer per line (.perm)
Permutation load_permutation(const std::string& path);
Permutation parse_permutation(const std::string& text);
std::string permutation_json(const Permutation& p);

Vec parse_vector(const std::string& text);

std::string chain_json(const DecompositionChain& chain);
DecompositionChain parse_chain(const std::string& text);

std::string network_json(const MultiGroupNetwork& net);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& data);

}  // namespace hperm
