#include "tabr/embeddings.hpp"

namespace tabr {

std::string embedding_scheme_name(NumEmbeddingConfig::Scheme s) {
    switch (s) {
        case NumEmbeddingConfig::Scheme::none: return "none";
        case NumEmbeddingConfig::Scheme::lr: return "lr";
        case NumEmbeddingConfig::Scheme::plr: return "plr";
        case NumEmbeddingConfig::Scheme::plr_lite: return "plr-lite";
    }
    return "?";
}

NumEmbeddingConfig::Scheme embedding_scheme_from_name(const std::string& s) {
    if (s == "none") return NumEmbeddingConfig::Scheme::none;
    if (s == "lr") return NumEmbeddingConfig::Scheme::lr;
    if (s == "plr") return NumEmbeddingConfig::Scheme::plr;
    if (s == "plr-lite") return NumEmbeddingConfig::Scheme::plr_lite;
    fatal("unknown embedding scheme: '" + s + "'");
}

}  // namespace tabr
