// Finds one product of a 2^k binary-code topic in k questions.
//
//   bisection_demo [k] [target]

#include <cstdlib>
#include <iostream>
#include <string>

#include "qsbps/qsbps.hpp"

using namespace qsbps;

int main(int argc, char** argv) {
    const std::size_t k = argc > 1 ? std::stoul(argv[1]) : 4;
    const std::size_t n = std::size_t{1} << k;
    const std::size_t target = argc > 2 ? std::stoul(argv[2]) % n : n / 3;

    SyntheticSpec spec;
    spec.n_products = n;
    spec.n_bit_entities = k;
    spec.n_distractors = 5;
    auto corpus = generate_synthetic(spec);
    auto ws = prepare_workspace(corpus, FieldMode::MetadataAndReviews, {}, 42);
    const auto& index = ws.indexes.front();

    // Untrained model: uniform belief, zero rewards.
    TrainedModel model;
    model.topic_id = index.topic_id;
    model.product_ids = index.product_ids;
    model.entities = index.entity_labels;
    model.alpha = uniform_prior(n);
    model.rewards.assign(index.pool_size(), 0.0);
    model.mode = TrainingMode::None;

    Session s(model, index, {SelectionParams{}, ErrorModel::none(), k});
    std::cout << "looking for " << index.product_ids[target] << " among " << n << " products\n";
    while (auto q = s.current_question()) {
        const bool yes = index.incidence[*q].test(target);
        std::cout << "  Are you interested in " << index.entity_labels[*q] << "? " << (yes ? "yes" : "no");
        s.submit_answer(yes ? Answer::Yes : Answer::No);
        std::cout << "  -> " << s.candidates().count() << " candidates left\n";
    }
    const auto top = s.final_ranking(1).front();
    std::cout << "top product: " << index.product_ids[top.product] << " (rank of target " << s.rank_of(target)
              << ")\n";
    return top.product == target ? EXIT_SUCCESS : EXIT_FAILURE;
}
