"""Reference neural mask filler for the ape-fill v1 wire protocol.

A deliberately small transformer masked LM: pretrained on clean references
(predict the hidden token), then fine-tuned on masked-LM records whose mask
targets are erroneous tokens, which turns infilling into error injection.
The serve loop speaks line-delimited JSON over stdin/stdout.
"""

__version__ = "0.1.0"
