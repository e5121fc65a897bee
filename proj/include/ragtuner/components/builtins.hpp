#pragma once

#include "ragtuner/runtime/registry.hpp"

namespace ragtuner::components {

/// Registry with the built-in component kinds: chunker, embedder,
/// triple_extractor, synonym_linker, vector_retriever, ppr_retriever,
/// generator.
runtime::ComponentRegistry builtin_registry();

void register_builtins(runtime::ComponentRegistry& registry);

}  // namespace ragtuner::components
