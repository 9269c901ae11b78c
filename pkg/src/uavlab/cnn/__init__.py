from .adam import AdamState, adam_step
from .checkpoint import load_model, save_model
from .layers import (Conv2D, Dense, Flatten, MaxPool2D, ReLU, conv2d_backward, conv2d_forward,
                     dense_backward, dense_forward, maxpool_backward, maxpool_forward, relu_backward,
                     relu_forward)
from .model import Sequential, build_cnn, build_mlp, mae_loss, mse_loss
from .training import History, TrainConfig, evaluate_mae, predict, train
