from .dqn import DqnConfig, DqnModel, dqn_train, load_dqn, save_dqn, td_targets, td_update
from .env import (ACTIONS, STAY, EnvContext, RlState, TabularMdp, UavCoverageEnv, coverage_map, env_step, move,
                  occupancy_code, value_iteration)
from .policy import ConstantPolicy, TabularPolicy, rl_policy_positions, rollout
from .tabular import (TabularParams, double_q_learning_train, greedy, load_qtable, merge_double,
                      q_learning_train, save_qtable)
